"""Command-line interface.

Exit codes: 0 = verdict true / Found / Delivered, 1 = counterexample /
Unsat / Loop, 2 = usage or limit error, 3 = Inconclusive.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
from typing import Optional

from . import documents as docs
from .constructions import (
    outerplanar_pattern,
    sameface_pattern,
    target_removal_pattern,
    two_hop_id_pattern,
    two_hop_source_pattern,
)
from .forwarding import Pattern, compile_to_table
from .gadgets import GADGETS
from .graph import Graph, GraphError, LimitError, edge, failure_set, find_outerplanar_rotation
from .resilience import Family, ResilienceReport, verify
from .routing import DELIVERED, route
from .synthesis import FOUND, INCONCLUSIVE, UNSAT, replay, synthesize, synthesize_k
from .transforms import (
    ContractionStep,
    SubgraphStep,
    derive_skipping,
    minor_transfer,
    subgraph_transfer,
)

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


def _read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write(doc: dict, path: Optional[str]):
    text = docs.dumps(doc)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_graph(path: str, permissive: bool) -> tuple[Graph, dict[str, Family]]:
    return docs.graph_from_doc(_read_json(path), permissive)


def _parse_failures(g: Graph, spec: Optional[str]) -> frozenset:
    if not spec:
        return frozenset()
    pairs = []
    for token in spec.split(","):
        u, _, v = token.partition("-")
        pairs.append((int(u), int(v)))
    return failure_set(g, pairs)


def _family_from_args(args, g: Graph, families: dict[str, Family]) -> Family:
    picked = [bool(args.family), bool(args.all), args.k is not None]
    if sum(picked) != 1:
        raise GraphError("choose exactly one of --family, --all, --k")
    if args.family:
        if args.family not in families:
            raise GraphError(f"graph document has no family {args.family!r}; "
                             f"available: {sorted(families)}")
        return families[args.family]
    if args.all:
        return Family.all_subsets()
    return Family.all_subsets(max_size=args.k)


def _target(args, g: Graph) -> int:
    tgt = args.tgt if args.tgt is not None else g.target
    if tgt is None:
        raise GraphError("no target: pass --tgt or set it in the graph document")
    return tgt


def _verify_chunk(payload):
    gdoc, pdoc, tgt, sets, src = payload
    g, _ = docs.graph_from_doc(gdoc)
    p = docs.pattern_from_doc(pdoc, g)
    fam = Family.explicit([[tuple(e) for e in s] for s in sets])
    rep = verify(g, p, tgt, fam, src=src)
    return docs.report_to_doc(rep)


def _parallel_verify(g: Graph, p: Pattern, tgt: int, family: Family, src, jobs: int) -> ResilienceReport:
    sets = sorted(family.enumerate(g), key=lambda s: sorted(s))
    if isinstance(p, Pattern) and type(p).__name__ == "ProceduralPattern":
        p = compile_to_table(p, g)
    chunks = [sets[i::jobs] for i in range(jobs)]
    gdoc, pdoc = docs.graph_to_doc(g), docs.pattern_to_doc(p)
    payloads = [
        (gdoc, pdoc, tgt, [[list(e) for e in s] for s in chunk], src)
        for chunk in chunks
        if chunk
    ]
    with multiprocessing.Pool(jobs) as pool:
        results = pool.map(_verify_chunk, payloads)
    verdict = all(r["verdict"] for r in results)
    merged = ResilienceReport(family.describe(), verdict)
    merged.failure_sets_checked = sum(r["failure_sets_checked"] for r in results)
    merged.traces_run = sum(r["traces_run"] for r in results)
    for r in results:
        if not r["verdict"]:
            cx = r["counterexample"]
            merged.counterexample = (
                frozenset(edge(u, v) for u, v in cx["failed"]),
                cx["src"],
                None,
            )
            break
    return merged


def cmd_gadget(args) -> int:
    name = args.name
    if name not in GADGETS:
        raise GraphError(f"unknown gadget {name!r}; available: {sorted(GADGETS)}")
    if name == "padded":
        gd = GADGETS[name](args.k if args.k is not None else 0)
    elif name == "replicated":
        gd = GADGETS[name](args.r, args.pad)
    else:
        gd = GADGETS[name]()
    _write(docs.graph_to_doc(gd.graph, gd.families), args.output)
    return EXIT_TRUE


def cmd_construct(args) -> int:
    g, _ = _load_graph(args.graph, args.permissive)
    tgt = _target(args, g)
    algo = args.algo
    if algo in ("outerplanar", "sameface") and g.rotation is None:
        rot = find_outerplanar_rotation(g)
        if rot is None:
            raise GraphError("no outerplanar rotation found; supply one in the document")
        g = g.with_rotation(rot)
    if algo == "outerplanar":
        p = outerplanar_pattern(g, tgt)
    elif algo == "sameface":
        p, covered = sameface_pattern(g, tgt)
        print(f"covered sources: {sorted(covered)}", file=sys.stderr)
    elif algo == "target-removal":
        p = target_removal_pattern(g, tgt)
    elif algo == "two-hop-source":
        src = args.src if args.src is not None else g.source
        if src is None:
            raise GraphError("two-hop-source needs --src or a document source")
        p = two_hop_source_pattern(g, src, tgt)
    elif algo == "two-hop-id":
        p = two_hop_id_pattern(g, tgt)
    else:
        raise GraphError(f"unknown construction {algo!r}")
    _write(docs.pattern_to_doc(p), args.output)
    return EXIT_TRUE


def cmd_route(args) -> int:
    g, _ = _load_graph(args.graph, args.permissive)
    p = docs.pattern_from_doc(_read_json(args.pattern), g, args.permissive)
    failed = _parse_failures(g, args.fail)
    src = args.src if args.src is not None else g.source
    tgt = _target(args, g)
    if src is None:
        raise GraphError("no source: pass --src or set it in the graph document")
    trace = route(g, failed, p, src, tgt)
    _write(docs.trace_to_doc(trace), args.output)
    return EXIT_TRUE if trace.outcome == DELIVERED else EXIT_FALSE


def cmd_verify(args) -> int:
    g, families = _load_graph(args.graph, args.permissive)
    p = docs.pattern_from_doc(_read_json(args.pattern), g, args.permissive)
    tgt = _target(args, g)
    family = _family_from_args(args, g, families)
    src = args.src if args.src is not None else (p.source if p.source_matching else None)
    if args.jobs > 1:
        report = _parallel_verify(g, p, tgt, family, src, args.jobs)
    else:
        report = verify(g, p, tgt, family, src=src)
    _write(docs.report_to_doc(report), args.output)
    return EXIT_TRUE if report.verdict else EXIT_FALSE


def cmd_synthesize(args) -> int:
    g, families = _load_graph(args.graph, args.permissive)
    tgt = _target(args, g)
    family = _family_from_args(args, g, families)
    result = synthesize(
        g,
        tgt,
        family,
        src_matching=args.source_matching,
        src=args.src,
        pruning=args.prune,
        budget=args.budget,
    )
    print(f"synthesize: {result.status} (family={result.family_name}, "
          f"pruning={result.pruning}, nodes={result.search_nodes})", file=sys.stderr)
    if result.status == FOUND:
        _write(docs.pattern_to_doc(result.pattern), args.output)
        return EXIT_TRUE
    if result.status == UNSAT:
        _write(docs.certificate_to_doc(result.certificate), args.output)
        return EXIT_FALSE
    return EXIT_INCONCLUSIVE


def cmd_replay(args) -> int:
    cert = docs.certificate_from_doc(_read_json(args.certificate), args.permissive)
    ok = replay(cert)
    print(f"replay: {'ok' if ok else 'MISMATCH'}", file=sys.stderr)
    return EXIT_TRUE if ok else EXIT_FALSE


def _steps_from_doc(raw: list) -> list:
    steps = []
    for s in raw:
        if s["op"] == "subgraph":
            steps.append(
                SubgraphStep(
                    frozenset(edge(u, v) for u, v in s.get("drop_edges", [])),
                    frozenset(s.get("drop_nodes", [])),
                )
            )
        elif s["op"] == "contract":
            steps.append(ContractionStep(s["i"], s["j"]))
        else:
            raise GraphError(f"unknown step op {s['op']!r}")
    return steps


def cmd_transform(args) -> int:
    g, _ = _load_graph(args.graph, args.permissive)
    p = docs.pattern_from_doc(_read_json(args.pattern), g, args.permissive)
    kind = args.kind
    if kind == "subgraph":
        drop_e = [tuple(map(int, t.split("-"))) for t in args.drop_edges.split(",")] if args.drop_edges else []
        drop_n = [int(t) for t in args.drop_nodes.split(",")] if args.drop_nodes else []
        steps = [SubgraphStep(frozenset(edge(u, v) for u, v in drop_e), frozenset(drop_n))]
    elif kind == "contract":
        i, j = map(int, args.edge.split("-"))
        steps = [ContractionStep(i, j)]
    elif kind == "minor":
        steps = _steps_from_doc(_read_json(args.steps))
    elif kind == "derive-skipping":
        tgt = _target(args, g)
        derived = derive_skipping(p, g, tgt)
        _write(docs.pattern_to_doc(derived), args.output)
        return EXIT_TRUE
    else:
        raise GraphError(f"unknown transform {kind!r}")
    new_g, new_p = minor_transfer(p, g, steps)
    _write(docs.pattern_to_doc(new_p), args.output)
    if args.out_graph:
        _write(docs.graph_to_doc(new_g), args.out_graph)
    return EXIT_TRUE


def cmd_export_dot(args) -> int:
    g, _ = _load_graph(args.graph, args.permissive)
    failed = _parse_failures(g, args.fail)
    trace = None
    if args.trace:
        tdoc = _read_json(args.trace)
        hops = tuple((v, inp, out) for v, inp, out in tdoc["hops"])
        from .routing import RouteTrace

        trace = RouteTrace(tdoc["source"], tdoc["target"], hops, tdoc["outcome"])
    text = docs.export_dot(g, failed, trace)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_TRUE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="failover-lab")
    ap.add_argument("--permissive", action="store_true", help="allow unknown document fields")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gadget", help="emit a named gadget graph document")
    p.add_argument("name")
    p.add_argument("--k", type=int, help="padding length for the padded gadget")
    p.add_argument("--r", type=int, default=2, help="copies for the replicated gadget")
    p.add_argument("--pad", type=int, default=0, help="per-copy padding for replicated")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("construct", help="build a pattern for a graph")
    p.add_argument("algo", choices=["outerplanar", "sameface", "target-removal", "two-hop-source", "two-hop-id"])
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--tgt", type=int)
    p.add_argument("--src", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("route", help="simulate one packet")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--fail", help="failed links u-v,u-v")
    p.add_argument("--src", type=int)
    p.add_argument("--tgt", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_route)

    p = sub.add_parser("verify", help="check resilience over a failure family")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--tgt", type=int)
    p.add_argument("--src", type=int)
    p.add_argument("--all", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--family")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("synthesize", help="search for a pattern or an impossibility certificate")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--tgt", type=int)
    p.add_argument("--src", type=int)
    p.add_argument("--all", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--family")
    p.add_argument("--source-matching", action="store_true")
    p.add_argument("--prune", default="orbit", choices=["none", "orbit", "orbit+degree2"])
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_synthesize)

    p = sub.add_parser("replay", help="re-execute an unsatisfiability certificate")
    p.add_argument("certificate")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("transform", help="transfer a pattern across graph operations")
    p.add_argument("kind", choices=["subgraph", "contract", "minor", "derive-skipping"])
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--drop-edges")
    p.add_argument("--drop-nodes")
    p.add_argument("--edge", help="contraction edge i-j")
    p.add_argument("--steps", help="JSON step list for minor transfers")
    p.add_argument("--tgt", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--out-graph")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("export-dot", help="render a graph (and optional trace) as DOT")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--fail")
    p.add_argument("--trace")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_export_dot)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (GraphError, LimitError, docs.DocumentError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
