"""Relevance and orbit analysis, failure families, and resilience verification.

The verifier is the ground-truth oracle at desk scale: a true verdict over
the all-subsets family is perfect resilience by definition.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .forwarding import Pattern, orbits
from .graph import (
    EMPTY,
    Edge,
    Graph,
    GraphError,
    LimitError,
    component,
    edge,
    local_failures,
)
from .routing import DELIVERED, NOT_APPLICABLE, RouteTrace, _simulate, route

BUDGET_ENV = "FAILOVER_LAB_BUDGET"
DEFAULT_TRACE_BUDGET = 2**24
FULL_ENUM_EDGE_LIMIT = 22


def trace_budget() -> int:
    return int(os.environ.get(BUDGET_ENV, DEFAULT_TRACE_BUDGET))


# ---------------------------------------------------------------------------
# Failure families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """A family of failure sets: explicit, all subsets, or size-bounded subsets."""

    kind: str  # "explicit" | "all" | "bounded"
    sets: tuple[frozenset[Edge], ...] = ()
    max_size: Optional[int] = None
    name: Optional[str] = None

    @staticmethod
    def explicit(sets: Iterable[Iterable[Sequence[int]] | frozenset[Edge]], name: Optional[str] = None) -> "Family":
        canon = []
        for s in sets:
            canon.append(frozenset(edge(u, v) for u, v in s))
        return Family("explicit", tuple(canon), name=name)

    @staticmethod
    def all_subsets(max_size: Optional[int] = None) -> "Family":
        return Family("bounded" if max_size is not None else "all", max_size=max_size)

    def enumerate(self, g: Graph) -> Iterator[frozenset[Edge]]:
        if self.kind == "explicit":
            for s in self.sets:
                extra = s - g.edges
                if extra:
                    raise GraphError(f"family set uses non-edges: {sorted(extra)}")
                yield s
            return
        if g.m > FULL_ENUM_EDGE_LIMIT:
            raise LimitError(f"m={g.m} exceeds the enumeration limit {FULL_ENUM_EDGE_LIMIT}")
        edges = sorted(g.edges)
        top = g.m if self.kind == "all" else min(self.max_size, g.m)
        for r in range(top + 1):
            for combo in itertools.combinations(edges, r):
                yield frozenset(combo)

    def size(self, g: Graph) -> int:
        if self.kind == "explicit":
            return len(self.sets)
        if self.kind == "all":
            return 2**g.m
        return sum(
            len(list(itertools.combinations(range(g.m), r)))
            for r in range(min(self.max_size, g.m) + 1)
        )

    def describe(self) -> str:
        if self.name:
            return self.name
        if self.kind == "explicit":
            return f"explicit({len(self.sets)})"
        if self.kind == "all":
            return "all-subsets"
        return f"subsets(|F|<={self.max_size})"


# ---------------------------------------------------------------------------
# Relevance and orbit conditions
# ---------------------------------------------------------------------------


def relevant_neighbors(g: Graph, failed: frozenset[Edge], i: int, tgt: int) -> frozenset[int]:
    """Neighbors of i that can still relay to tgt, judged from i's local view.

    With G' = g minus only i's incident failures, j is relevant iff a path
    joins i to tgt in G' after deleting i's other surviving neighbors as
    nodes.  Non-incident failures are invisible to i and are ignored.
    """
    if i == tgt:
        raise GraphError("relevance is undefined at the target itself")
    local = local_failures(g, failed, i)
    survivors = [u for u in g.neighbors(i) if edge(u, i) not in local]
    out = set()
    for j in survivors:
        blocked = set(survivors) - {j}
        if _reaches(g, local, i, tgt, blocked):
            out.add(j)
    return frozenset(out)


def _reaches(g: Graph, removed_edges: frozenset[Edge], src: int, tgt: int, blocked_nodes: set[int]) -> bool:
    if src == tgt:
        return True
    seen = {src}
    stack = [src]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if y in seen or y in blocked_nodes or edge(x, y) in removed_edges:
                continue
            if y == tgt:
                return True
            seen.add(y)
            stack.append(y)
    return False


@dataclass(frozen=True)
class OrbitCheck:
    status: str  # "ok" | "violation" | "not_applicable"
    relevant: frozenset[int] = frozenset()
    orbit_classes: tuple[frozenset[int], ...] = ()


def source_orbit_applicable(g: Graph, failed: frozenset[Edge], i: int, src: int, relevant: frozenset[int]) -> bool:
    """Source-matching orbit hypothesis: src is adjacent to at least two
    relevant neighbors of i whose links to i are still alive."""
    if i == src:
        return False
    alive_adj = [r for r in relevant if r in g.neighbors(src)]
    return len(alive_adj) >= 2


def source_paths_applicable(
    g: Graph, failed: frozenset[Edge], i: int, src: int, tgt: int, relevant: frozenset[int]
) -> bool:
    """Node-disjoint path hypothesis: for every relevant v_x there is a
    relevant v_y != v_x with a path src..v_x,i node-disjoint from i,v_y..tgt.

    Checked by brute-force path enumeration on the failed-edge-free graph.
    """
    if i == src or len(relevant) < 2:
        return False
    rel = sorted(relevant)
    for vx in rel:
        if not any(
            vy != vx and _disjoint_pair_exists(g, failed, src, vx, i, vy, tgt) for vy in rel
        ):
            return False
    return True


def _disjoint_pair_exists(
    g: Graph, failed: frozenset[Edge], src: int, vx: int, i: int, vy: int, tgt: int
) -> bool:
    # Path A: src .. vx (avoiding i), path B: vy .. tgt (avoiding i and A).
    if vx in (i, tgt) or vy == i or src == i:
        return False
    if vy == src or vx == vy:
        return False
    for a_nodes in _simple_paths(g, failed, src, vx, banned=frozenset((i,))):
        if vy in a_nodes or tgt in a_nodes:
            continue
        if _reaches(g, failed, vy, tgt, set(a_nodes) | {i}):
            return True
    return False


def _simple_paths(g: Graph, failed: frozenset[Edge], a: int, b: int, banned: frozenset[int]) -> Iterator[frozenset[int]]:
    if a == b:
        yield frozenset((a,))
        return
    path = [a]
    on_path = {a}

    def rec():
        x = path[-1]
        for y in g.neighbors(x):
            if y in on_path or y in banned or edge(x, y) in failed:
                continue
            if y == b:
                yield frozenset(path) | {b}
                continue
            path.append(y)
            on_path.add(y)
            yield from rec()
            path.pop()
            on_path.remove(y)

    yield from rec()


def check_orbit_condition(
    g: Graph,
    failed: frozenset[Edge],
    p: Pattern,
    i: int,
    tgt: int,
    src: Optional[int] = None,
    variant: str = "s-orbit",
) -> OrbitCheck:
    """Check that all relevant neighbors of i share one orbit of i's function.

    Without src the hypothesis is just >= 2 relevant neighbors.  With src,
    `variant` selects the applicability test: "s-orbit" (src adjacent to two
    live relevant neighbors, which also covers its multi-neighbor extension)
    or "s-paths" (the node-disjoint-paths condition).
    """
    rel = relevant_neighbors(g, failed, i, tgt)
    if src is None:
        applicable = len(rel) >= 2
    elif variant == "s-orbit":
        applicable = source_orbit_applicable(g, failed, i, src, rel)
    elif variant == "s-paths":
        applicable = source_paths_applicable(g, failed, i, src, tgt, rel)
    else:
        raise GraphError(f"unknown orbit variant {variant!r}")
    if not applicable:
        return OrbitCheck("not_applicable", rel)
    local = local_failures(g, failed, i)
    classes = orbits(p, g, i, local, src if p.source_matching else None)
    holding = [c for c in classes if rel & c]
    if len(holding) == 1 and rel <= holding[0]:
        return OrbitCheck("ok", rel, tuple(classes))
    return OrbitCheck("violation", rel, tuple(classes))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class ResilienceReport:
    mode: str
    verdict: bool
    counterexample: Optional[tuple[frozenset[Edge], int, RouteTrace]] = None
    failure_sets_checked: int = 0
    traces_run: int = 0

    def __bool__(self) -> bool:
        return self.verdict


def verify(
    g: Graph,
    p: Pattern,
    tgt: int,
    family: Family,
    src: Optional[int] = None,
) -> ResilienceReport:
    """Route every applicable source under every family failure set.

    Verdict is true iff all applicable routes deliver; the first failure in
    canonical (F, src) order is returned as the counterexample.
    """
    if p.source_matching and src is None:
        src = p.source
    if p.source_matching and src is None:
        raise GraphError("source-matching pattern needs a source")
    mode = family.describe() if family.kind != "all" else "perfect"
    budget = trace_budget()
    checked = 0
    traces = 0
    for failed in family.enumerate(g):
        checked += 1
        comp = component(g, failed, tgt)
        sources = [src] if src is not None else sorted(g.nodes - {tgt})
        for s in sources:
            if s == tgt or s not in comp:
                continue
            traces += 1
            if traces > budget:
                raise LimitError(f"trace budget {budget} exceeded (set {BUDGET_ENV})")
            tr = _simulate(g, failed, p, s, tgt)
            if tr.outcome != DELIVERED:
                return ResilienceReport(mode, False, (failed, s, tr), checked, traces)
    return ResilienceReport(mode, True, None, checked, traces)
