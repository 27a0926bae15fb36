"""Sweep small planar graphs for perfect-resilience impossibility witnesses.

The figure behind the seven-node planar counterexample is not recoverable
from text, so the witness is re-derived: walk candidate (graph, target)
pairs, skip the ones a face-routing construction already settles, and run
bounded-failure synthesis on the rest until one comes back Unsat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .graph import Graph, LimitError, find_outerplanar_rotation, has_minor, induced_remove, components
from .resilience import Family
from .synthesis import INCONCLUSIVE, UNSAT, SynthesisResult, synthesize


@dataclass
class SweepEntry:
    edges: tuple
    tgt: int
    status: str
    search_nodes: int


@dataclass
class SweepReport:
    entries: list[SweepEntry] = field(default_factory=list)
    witness: Optional[tuple[Graph, int, SynthesisResult]] = None

    @property
    def inconclusive(self) -> list[SweepEntry]:
        return [e for e in self.entries if e.status == INCONCLUSIVE]


def is_planar_candidate(g: Graph, k5: Graph, k33: Graph) -> bool:
    return not has_minor(g, k5) and not has_minor(g, k33)


def removal_outerplanar(g: Graph, tgt: int) -> bool:
    """True when every component of g minus tgt has an outerplanar rotation,
    i.e. the target-removal construction already gives perfect resilience."""
    rest = induced_remove(g, drop_nodes=[tgt])
    for comp in components(rest):
        sub = Graph(comp, (e for e in rest.edges if e[0] in comp and e[1] in comp))
        if sub.n > 1 and find_outerplanar_rotation(sub) is None:
            return False
    return True


def candidate_pairs(graphs: Iterable[Graph]) -> Iterator[tuple[Graph, int]]:
    """(graph, target) pairs worth searching.

    Graphs that are outerplanar are skipped outright; a target whose removal
    leaves outerplanar components is skipped as well (both have perfectly
    resilient constructions).  Candidates are visited mid-density first: the
    screens leave nothing sparse, the dense end is slow to search, and the
    witnesses empirically cluster around twelve links.  The order only
    affects how soon the first witness appears, never a verdict.
    """
    ordered = sorted(graphs, key=lambda g: (abs(g.m - 12), sorted(g.edges)))
    for g in ordered:
        try:
            if find_outerplanar_rotation(g) is not None:
                continue
        except LimitError:
            pass
        for tgt in sorted(g.nodes):
            if removal_outerplanar(g, tgt):
                continue
            yield g, tgt


def sweep(
    pairs: Iterable[tuple[Graph, int]],
    max_failures: int = 4,
    pruning: str = "orbit",
    budget_per_instance: int = 400_000,
    stop_at_first_unsat: bool = True,
    max_instances: Optional[int] = None,
) -> SweepReport:
    """Run bounded-failure synthesis on each candidate pair.

    Budget exhaustions are recorded as inconclusive and the sweep moves on;
    the first Unsat (with its replayable certificate) becomes the witness.
    """
    report = SweepReport()
    family = Family.all_subsets(max_size=max_failures)
    for count, (g, tgt) in enumerate(pairs):
        if max_instances is not None and count >= max_instances:
            break
        result = synthesize(g, tgt, family, pruning=pruning, budget=budget_per_instance)
        report.entries.append(
            SweepEntry(tuple(sorted(g.edges)), tgt, result.status, result.search_nodes)
        )
        if result.status == UNSAT:
            report.witness = (g, tgt, result)
            if stop_at_first_unsat:
                break
    return report
