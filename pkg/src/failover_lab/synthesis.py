"""Backtracking synthesis of forwarding tables over a failure family.

Table entries are instantiated lazily: an entry is created only when a
simulation first queries its (node, local failure view, in-port) key, and the
search branches over all live out-ports there.  A branch dies when some
(failure set, source) pair loops; Unsat means the whole (pruned) tree was
exhausted and comes with a replayable certificate.

Pruning levels:
  none          plain search.
  orbit         skip assignments that strand a relevant neighbor outside the
                one orbit a resilient pattern must give it (with source
                matching, only where the source is adjacent to two relevant
                relays).
  orbit+degree2 additionally apply the node-disjoint-paths criterion in
                source-matching mode.

Pruned assignments cannot belong to any perfectly resilient pattern, so an
Unsat verdict under any family certifies that no perfectly resilient pattern
exists for the graph and target in the chosen matching mode.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Optional

from .forwarding import InPort, Pattern, PatternTable, TableKey
from .graph import Edge, Graph, GraphError, component, edge
from .resilience import (
    Family,
    relevant_neighbors,
    source_orbit_applicable,
    source_paths_applicable,
    verify,
)
from .routing import LOOP, RouteTrace, _simulate

PRUNING_LEVELS = ("none", "orbit", "orbit+degree2")

FOUND = "found"
UNSAT = "unsat"
INCONCLUSIVE = "inconclusive"

CERT_VERSION = 1


class BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class RefutedBranch:
    assignments: tuple[tuple[TableKey, int], ...]
    failure_set: frozenset[Edge]
    src: int
    node_sequence: tuple[int, ...]


@dataclass
class UnsatCertificate:
    version: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    tgt: int
    src_matching: bool
    src: Optional[int]
    pruning: str
    family_sets: tuple[frozenset[Edge], ...]
    entries_branched: int
    search_nodes: int
    branches: tuple[RefutedBranch, ...]


@dataclass
class SynthesisResult:
    status: str
    pattern: Optional[PatternTable] = None
    certificate: Optional[UnsatCertificate] = None
    entries_branched: int = 0
    search_nodes: int = 0
    family_name: str = ""
    pruning: str = "none"
    src_matching: bool = False

    @property
    def found(self) -> bool:
        return self.status == FOUND

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT


def _one_cycle_possible(m: dict[int, int], relevant: frozenset[int]) -> bool:
    """Can a total extension of the partial port map put every relevant
    neighbor on one common cycle?

    Necessary and sufficient over the closure S of the relevant set under m:
    no two members of S may share a successor inside S, and any closed cycle
    through S must contain all of S.
    """
    s = set(relevant)
    stack = list(relevant)
    while stack:
        x = stack.pop()
        y = m.get(x)
        if y is not None and y not in s:
            s.add(y)
            stack.append(y)
    preds: set[int] = set()
    for x in s:
        y = m.get(x)
        if y is not None and y in s:
            if y in preds:
                return False
            preds.add(y)
    for r in relevant:
        seen: set[int] = set()
        cur = r
        while cur in m and cur not in seen:
            seen.add(cur)
            cur = m[cur]
        if cur in seen:  # closed a cycle; it must swallow the whole closure
            cyc = {cur}
            x = m[cur]
            while x != cur:
                cyc.add(x)
                x = m[x]
            if not s <= cyc:
                return False
    return True


def synthesize(
    g: Graph,
    tgt: int,
    family: Family,
    src_matching: bool = False,
    src: Optional[int] = None,
    pruning: str = "orbit",
    budget: int = 2_000_000,
) -> SynthesisResult:
    """Decide whether some forwarding table delivers on every family pair.

    Found patterns are re-verified over the family before being returned;
    Unsat certificates replay deterministically; Inconclusive reports a
    budget exhaustion and claims nothing.
    """
    if pruning not in PRUNING_LEVELS:
        raise GraphError(f"unknown pruning level {pruning!r}")
    if tgt not in g.nodes:
        raise GraphError(f"unknown target {tgt}")
    if src_matching:
        src = g.source if src is None else src
        if src is None:
            raise GraphError("source matching requires a source")
    else:
        src = None

    # Most-constrained failure sets first: they pin entries with the least
    # branching, so the prefix of the search tree stays narrow.
    sets = sorted(family.enumerate(g), key=lambda s: (-len(s), sorted(s)))
    pairs: list[tuple[frozenset[Edge], int]] = []
    for failed in sets:
        comp = component(g, failed, tgt)
        sources = [src] if src_matching else sorted(g.nodes - {tgt})
        for s in sources:
            if s != tgt and s in comp:
                pairs.append((failed, s))

    table: dict[TableKey, int] = {}
    maps: dict[tuple[int, frozenset[Edge]], dict[int, int]] = {}
    assign_stack: list[tuple[TableKey, int]] = []
    branches: list[RefutedBranch] = []
    branched: set[TableKey] = set()
    nodes_used = 0

    rel_cache: dict[tuple[int, frozenset[Edge]], frozenset[int]] = {}
    enforce_cache: dict[tuple[int, frozenset[Edge]], bool] = {}

    def relevant(v: int, local: frozenset[Edge]) -> frozenset[int]:
        key = (v, local)
        r = rel_cache.get(key)
        if r is None:
            r = relevant_neighbors(g, local, v, tgt)
            rel_cache[key] = r
        return r

    def enforce(v: int, local: frozenset[Edge]) -> bool:
        key = (v, local)
        e = enforce_cache.get(key)
        if e is None:
            rel = relevant(v, local)
            if len(rel) < 2:
                e = False
            elif not src_matching:
                e = True
            else:
                e = v != src and source_orbit_applicable(g, local, v, src, rel)
                if not e and pruning == "orbit+degree2" and v != src:
                    e = source_paths_applicable(g, local, v, src, tgt, rel)
            enforce_cache[key] = e
        return e

    def target_live(v: int, local: frozenset[Edge]) -> bool:
        return tgt in g.neighbors(v) and edge(v, tgt) not in local

    def tails_can_reach_target(m: dict[int, int], bot: Optional[int], live: list[int]) -> bool:
        # With the target link alive, the only exit an adversary must leave
        # working is the target port itself: no tail may close a cycle that
        # misses it.  `bot` is the empty-in-port entry, if already assigned.
        starts = list(live)
        if bot is not None:
            starts.append(bot)
        for u in starts:
            walk = set()
            cur = u
            while True:
                if cur == tgt:
                    break
                if cur in walk:
                    return False
                walk.add(cur)
                cur = m.get(cur)
                if cur is None:
                    break
        return True

    def candidates(v: int, local: frozenset[Edge], inp: InPort) -> tuple[list[int], set[TableKey]]:
        """Allowed out-ports at a fresh key, plus the keys the filter read.

        The dependency keys feed conflict sets: a pruned candidate might be
        viable under different values of the sibling entries at (v, local).
        """
        order = g.rotation[v] if g.rotation else g.neighbors(v)
        live = [u for u in order if edge(u, v) not in local]
        if pruning == "none":
            return live, set()
        port_map = maps.get((v, local), {})
        deps: set[TableKey] = {(v, local, u) for u in port_map}
        if target_live(v, local) and not src_matching:
            bot = table.get((v, local, None))
            if bot is not None:
                deps.add((v, local, None))
            out = []
            for cand in live:
                if inp is None:
                    ok = tails_can_reach_target(port_map, cand, live)
                else:
                    trial = dict(port_map)
                    trial[inp] = cand
                    ok = tails_can_reach_target(trial, bot, live)
                if ok:
                    out.append(cand)
            return out, (deps if len(out) < len(live) else set())
        if inp is None or not enforce(v, local):
            return live, set()
        rel = relevant(v, local)
        out = []
        for cand in live:
            trial = dict(port_map)
            trial[inp] = cand
            if _one_cycle_possible(trial, rel):
                out.append(cand)
        return out, (deps if len(out) < len(live) else set())

    def assign(key: TableKey, out: int):
        table[key] = out
        v, local, inp = key
        if inp is not None:
            maps.setdefault((v, local), {})[inp] = out
        assign_stack.append((key, out))

    def unassign(key: TableKey):
        del table[key]
        v, local, inp = key
        if inp is not None:
            del maps[(v, local)][inp]
        assign_stack.pop()

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

    def run(idx: int) -> Optional[set[TableKey]]:
        """Complete pairs idx.. under the current table.

        Returns None on success (assignments kept), else a conflict set of
        still-assigned keys responsible for the failure.  A refuted trace is
        determined entirely by the keys it queried, so a frame whose key is
        absent from the conflict can skip its remaining candidates
        (conflict-directed backjumping).
        """
        nonlocal nodes_used
        if idx == len(pairs):
            return None
        failed, s = pairs[idx]
        state: tuple[int, InPort] = (s, None)
        seen: set[tuple[int, InPort]] = {state}
        queried: set[TableKey] = set()
        trace_nodes = [s]
        while True:
            v, inp = state
            local = failed & g.incident(v)
            key = (v, local, inp)
            out = table.get(key)
            if out is None:
                branched.add(key)
                cands, conflict = candidates(v, local, inp)
                for cand in cands:
                    nodes_used += 1
                    if nodes_used > budget:
                        raise BudgetExhausted
                    assign(key, cand)
                    sub = run(idx)
                    if sub is None:
                        return None
                    unassign(key)
                    if key not in sub:
                        return sub
                    sub.discard(key)
                    conflict |= sub
                return conflict
            queried.add(key)
            trace_nodes.append(out)
            if out == tgt:
                return run(idx + 1)
            state = (out, v)
            if state in seen:
                branches.append(
                    RefutedBranch(tuple(assign_stack), failed, s, tuple(trace_nodes))
                )
                return set(queried)
            seen.add(state)

    base = SynthesisResult(
        status=INCONCLUSIVE,
        family_name=family.describe(),
        pruning=pruning,
        src_matching=src_matching,
    )
    try:
        ok = run(0) is None
    except BudgetExhausted:
        base.entries_branched = len(branched)
        base.search_nodes = nodes_used
        return base

    base.entries_branched = len(branched)
    base.search_nodes = nodes_used
    if ok:
        pattern = PatternTable(dict(table), source_matching=src_matching, source=src)
        report = verify(g, pattern, tgt, family, src=src)
        assert report.verdict, "synthesized pattern failed its own family"
        base.status = FOUND
        base.pattern = pattern
        return base
    base.status = UNSAT
    base.certificate = UnsatCertificate(
        version=CERT_VERSION,
        nodes=tuple(sorted(g.nodes)),
        edges=tuple(sorted(g.edges)),
        tgt=tgt,
        src_matching=src_matching,
        src=src,
        pruning=pruning,
        family_sets=tuple(sets),
        entries_branched=len(branched),
        search_nodes=nodes_used,
        branches=tuple(branches),
    )
    return base


def synthesize_k(
    g: Graph,
    tgt: int,
    k: int,
    src_matching: bool = False,
    src: Optional[int] = None,
    budget: int = 2_000_000,
) -> SynthesisResult:
    """Synthesis restricted to failure sets of size at most k (no pruning:
    the orbit lemmas argue about unbounded failures, so they may not be used
    to cut a k-bounded search)."""
    return synthesize(
        g, tgt, Family.all_subsets(max_size=k), src_matching, src, pruning="none", budget=budget
    )


def replay(cert: UnsatCertificate) -> bool:
    """Re-execute every refuting branch of an Unsat certificate.

    True iff each recorded partial table reproduces its recorded failing
    trace exactly.  An empty certificate cannot support an Unsat claim.
    """
    if cert.version != CERT_VERSION:
        raise GraphError(f"certificate version {cert.version} not supported")
    if not cert.branches:
        raise GraphError("certificate has no refuting branches")
    g = Graph(cert.nodes, cert.edges, target=cert.tgt, source=cert.src)
    for branch in cert.branches:
        table = PatternTable(dict(branch.assignments), cert.src_matching, cert.src)
        trace = _simulate(g, branch.failure_set, table, branch.src, cert.tgt)
        if trace.outcome != LOOP:
            return False
        if trace.node_sequence() != branch.node_sequence:
            return False
    return True
