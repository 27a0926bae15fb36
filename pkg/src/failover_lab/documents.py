"""Canonical JSON documents: graphs, patterns, reports, certificates.

One format for everything, sorted keys, canonical edge order (low id first),
so every artifact is diffable and save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .forwarding import Pattern, PatternTable, SkippingPattern, SkippingRule
from .graph import Edge, Graph, GraphError, edge
from .resilience import Family, ResilienceReport
from .routing import RouteTrace
from .synthesis import CERT_VERSION, RefutedBranch, SynthesisResult, UnsatCertificate

FORMAT_GRAPH = "failover-lab/graph"
FORMAT_PATTERN = "failover-lab/pattern"
FORMAT_REPORT = "failover-lab/report"
FORMAT_CERT = "failover-lab/cert"
FORMAT_TRACE = "failover-lab/trace"


class DocumentError(GraphError):
    pass


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _edges_out(edges) -> list[list[int]]:
    return [list(e) for e in sorted(edges)]


def _edges_in(raw) -> list[tuple[int, int]]:
    return [(int(u), int(v)) for u, v in raw]


def _check_fields(doc: dict, allowed: set[str], permissive: bool, what: str):
    unknown = set(doc) - allowed
    if unknown and not permissive:
        raise DocumentError(f"unknown fields in {what}: {sorted(unknown)}")


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


def graph_to_doc(g: Graph, families: Optional[dict[str, Family]] = None) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_GRAPH,
        "version": 1,
        "n": g.n,
        "edges": _edges_out(g.edges),
    }
    if g.nodes != frozenset(range(g.n)):
        doc["nodes"] = sorted(g.nodes)
    if g.rotation is not None:
        doc["rotation"] = {str(v): list(order) for v, order in sorted(g.rotation.items())}
    if g.target is not None:
        doc["target"] = g.target
    if g.source is not None:
        doc["source"] = g.source
    if families:
        doc["families"] = {
            name: [_edges_out(s) for s in fam.sets]
            for name, fam in sorted(families.items())
        }
    return doc


def graph_from_doc(doc: dict, permissive: bool = False) -> tuple[Graph, dict[str, Family]]:
    if doc.get("format") != FORMAT_GRAPH:
        raise DocumentError("not a graph document")
    _check_fields(
        doc,
        {"format", "version", "n", "nodes", "edges", "rotation", "target", "source", "families"},
        permissive,
        "graph document",
    )
    nodes = doc.get("nodes", int(doc["n"]))
    rotation = None
    if "rotation" in doc:
        rotation = {int(v): tuple(order) for v, order in doc["rotation"].items()}
    g = Graph(nodes, _edges_in(doc["edges"]), rotation, doc.get("target"), doc.get("source"))
    families = {
        name: Family.explicit([_edges_in(s) for s in sets], name=name)
        for name, sets in doc.get("families", {}).items()
    }
    return g, families


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------


def pattern_to_doc(p: Pattern) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_PATTERN,
        "version": 1,
        "source_matching": p.source_matching,
    }
    if p.source is not None:
        doc["source"] = p.source
    if isinstance(p, PatternTable):
        doc["mode"] = "table"
        doc["entries"] = [
            {
                "node": v,
                "failed": _edges_out(local),
                "in": inp,
                "out": out,
            }
            for (v, local, inp), out in sorted(
                p.entries.items(),
                key=lambda kv: (kv[0][0], sorted(kv[0][1]), -1 if kv[0][2] is None else kv[0][2]),
            )
        ]
    elif isinstance(p, SkippingPattern):
        doc["mode"] = "skipping"
        doc["rules"] = {
            str(v): {
                "perm": {str(a): b for a, b in rule.perm},
                "start": rule.start,
                "dead": list(rule.dead),
            }
            for v, rule in sorted(p.rules.items())
        }
    else:
        doc["mode"] = "procedural"
        doc["name"] = p.name
        doc["params"] = dict(sorted(p.params.items()))
    return doc


def pattern_from_doc(doc: dict, g: Optional[Graph] = None, permissive: bool = False) -> Pattern:
    if doc.get("format") != FORMAT_PATTERN:
        raise DocumentError("not a pattern document")
    _check_fields(
        doc,
        {"format", "version", "mode", "source_matching", "source", "entries", "rules", "name", "params"},
        permissive,
        "pattern document",
    )
    matching = bool(doc["source_matching"])
    source = doc.get("source")
    mode = doc["mode"]
    if mode == "table":
        entries = {}
        for e in doc["entries"]:
            key = (int(e["node"]), frozenset(_edges_in(e["failed"])), e["in"])
            entries[key] = int(e["out"])
        return PatternTable(entries, matching, source)
    if mode == "skipping":
        rules = {}
        for v, r in doc["rules"].items():
            perm = tuple(sorted((int(a), int(b)) for a, b in r["perm"].items()))
            rules[int(v)] = SkippingRule(perm, int(r["start"]), tuple(r.get("dead", ())))
        return SkippingPattern(rules, matching, source)
    if mode == "procedural":
        from .constructions import PROCEDURAL_BUILDERS

        if g is None:
            raise DocumentError("procedural patterns need the graph to rebuild")
        builder = PROCEDURAL_BUILDERS.get(doc["name"])
        if builder is None:
            raise DocumentError(f"unknown procedural rule {doc['name']!r}")
        return builder(g, doc["params"])
    raise DocumentError(f"unknown pattern mode {mode!r}")


# ---------------------------------------------------------------------------
# Reports, traces, certificates
# ---------------------------------------------------------------------------


def trace_to_doc(trace: RouteTrace) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_TRACE,
        "version": 1,
        "source": trace.source,
        "target": trace.target,
        "outcome": trace.outcome,
        "hops": [[v, inp, out] for v, inp, out in trace.hops],
        "nodes": list(trace.node_sequence()),
    }
    if trace.loop_index is not None:
        doc["loop_index"] = trace.loop_index
    if trace.dead_reason is not None:
        doc["dead_reason"] = trace.dead_reason
    return doc


def report_to_doc(report: ResilienceReport) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_REPORT,
        "version": 1,
        "mode": report.mode,
        "verdict": report.verdict,
        "failure_sets_checked": report.failure_sets_checked,
        "traces_run": report.traces_run,
    }
    if report.counterexample is not None:
        failed, src, trace = report.counterexample
        doc["counterexample"] = {
            "failed": _edges_out(failed),
            "src": src,
            "trace": trace_to_doc(trace),
        }
    return doc


def _key_to_doc(key, out) -> list:
    v, local, inp = key
    return [v, _edges_out(local), inp, out]


def certificate_to_doc(cert: UnsatCertificate) -> dict:
    return {
        "format": FORMAT_CERT,
        "version": cert.version,
        "nodes": list(cert.nodes),
        "edges": _edges_out(cert.edges),
        "tgt": cert.tgt,
        "src_matching": cert.src_matching,
        "src": cert.src,
        "pruning": cert.pruning,
        "family": [_edges_out(s) for s in cert.family_sets],
        "entries_branched": cert.entries_branched,
        "search_nodes": cert.search_nodes,
        "branches": [
            {
                "assignments": [_key_to_doc(k, out) for k, out in b.assignments],
                "failed": _edges_out(b.failure_set),
                "src": b.src,
                "nodes": list(b.node_sequence),
            }
            for b in cert.branches
        ],
    }


def certificate_from_doc(doc: dict, permissive: bool = False) -> UnsatCertificate:
    if doc.get("format") != FORMAT_CERT:
        raise DocumentError("not a certificate document")
    _check_fields(
        doc,
        {"format", "version", "nodes", "edges", "tgt", "src_matching", "src", "pruning",
         "family", "entries_branched", "search_nodes", "branches"},
        permissive,
        "certificate document",
    )
    branches = []
    for b in doc["branches"]:
        assignments = tuple(
            ((int(v), frozenset(_edges_in(local)), inp), int(out))
            for v, local, inp, out in b["assignments"]
        )
        branches.append(
            RefutedBranch(
                assignments,
                frozenset(_edges_in(b["failed"])),
                int(b["src"]),
                tuple(b["nodes"]),
            )
        )
    return UnsatCertificate(
        version=int(doc["version"]),
        nodes=tuple(doc["nodes"]),
        edges=tuple(edge(u, v) for u, v in _edges_in(doc["edges"])),
        tgt=int(doc["tgt"]),
        src_matching=bool(doc["src_matching"]),
        src=doc.get("src"),
        pruning=doc["pruning"],
        family_sets=tuple(frozenset(_edges_in(s)) for s in doc["family"]),
        entries_branched=int(doc["entries_branched"]),
        search_nodes=int(doc["search_nodes"]),
        branches=tuple(branches),
    )


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def export_dot(
    g: Graph,
    failed: frozenset[Edge] = frozenset(),
    trace: Optional[RouteTrace] = None,
) -> str:
    """Graphviz rendering: failed links dashed, trace links bold."""
    used: set[Edge] = set()
    if trace is not None:
        used = {edge(v, out) for v, _, out in trace.hops}
    lines = ["graph g {"]
    for v in sorted(g.nodes):
        attrs = []
        if v == g.target:
            attrs.append("shape=doublecircle")
        if v == g.source:
            attrs.append("shape=square")
        lines.append(f"  {v}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
    for u, v in sorted(g.edges):
        attrs = []
        if (u, v) in failed:
            attrs.append("style=dashed")
            attrs.append("color=red")
        if (u, v) in used:
            attrs.append("penwidth=2.5")
        lines.append(f"  {u} -- {v}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"
