import itertools
import os

import pytest

from failover_lab.forwarding import PatternTable, SkippingPattern, SkippingRule
from failover_lab.gadgets import k5, relevance_fig
from failover_lab.graph import EMPTY, Graph, LimitError, edge, failure_set
from failover_lab.resilience import (
    Family,
    check_orbit_condition,
    relevant_neighbors,
    source_orbit_applicable,
    source_paths_applicable,
    verify,
)

from conftest import atlas_connected


# ---------------------------------------------------------------------------
# relevant_neighbors
# ---------------------------------------------------------------------------


def test_relevance_fig_no_failures():
    g = relevance_fig().graph  # i=0, v1..v3=1..3, s=4, t=5
    assert relevant_neighbors(g, EMPTY, 0, 5) == {2, 3}


def test_relevance_fig_failure_adds_relevance():
    g = relevance_fig().graph
    f = failure_set(g, [(0, 2)])
    rel = relevant_neighbors(g, f, 0, 5)
    assert 1 in rel and rel == {1, 3}


def test_relevance_unique_relay():
    g = Graph(3, [(0, 1), (1, 2)])
    assert relevant_neighbors(g, EMPTY, 0, 2) == {1}


def test_relevance_live_target_link_dominates():
    # With the target link alive, the target itself is the only relay the
    # local view certifies.
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert relevant_neighbors(g, EMPTY, 0, 2) == {2}


def test_relevance_monotone_under_failure_supersets():
    # Relevant survivors stay relevant under any failure superset.
    graphs = [g for g in atlas_connected(max_n=5) if 0 < g.m <= 7]
    for g in graphs[:40]:
        tgt = max(g.nodes)
        edges = sorted(g.edges)
        for r in range(min(g.m, 3) + 1):
            for base in itertools.combinations(edges, r):
                f = frozenset(base)
                rest = [e for e in edges if e not in f]
                for extra in rest:
                    f2 = f | {extra}
                    for i in sorted(g.nodes - {tgt}):
                        rel = relevant_neighbors(g, f, i, tgt)
                        survivors = {
                            u for u in g.neighbors(i) if edge(u, i) not in f2
                        }
                        rel2 = relevant_neighbors(g, f2, i, tgt)
                        assert rel & survivors <= rel2


# ---------------------------------------------------------------------------
# check_orbit_condition
# ---------------------------------------------------------------------------


def test_k5_orbit_condition_flags_non_cyclic_maps():
    g = k5().graph
    f = failure_set(g, [(0, 4)])
    bad = PatternTable()
    bad.set(0, frozenset({(0, 4)}), 1, 2)
    bad.set(0, frozenset({(0, 4)}), 2, 1)
    bad.set(0, frozenset({(0, 4)}), 3, 3)
    chk = check_orbit_condition(g, f, bad, 0, 4)
    assert chk.status == "violation"
    assert chk.relevant == {1, 2, 3}
    good = PatternTable()
    good.set(0, frozenset({(0, 4)}), 1, 2)
    good.set(0, frozenset({(0, 4)}), 2, 3)
    good.set(0, frozenset({(0, 4)}), 3, 1)
    assert check_orbit_condition(g, f, good, 0, 4).status == "ok"


def test_degree2_bounce_is_violation():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    bounce = PatternTable()
    bounce.set(2, EMPTY, 1, 1)
    bounce.set(2, EMPTY, 3, 3)
    chk = check_orbit_condition(g, EMPTY, bounce, 2, 0)
    assert chk.status == "violation"


def test_skipping_passes_orbit_condition_everywhere():
    for d in range(2, 7):
        g = Graph(d + 2, [(0, u) for u in range(1, d + 1)] + [(u, d + 1) for u in range(1, d + 1)])
        p = SkippingPattern({0: SkippingRule.from_cycle(list(range(1, d + 1)))})
        for r in range(d):
            for fail in itertools.combinations(range(1, d + 1), r):
                f = frozenset(edge(0, u) for u in fail)
                chk = check_orbit_condition(g, f, p, 0, d + 1)
                assert chk.status in ("ok", "not_applicable")


def test_orbit_condition_source_variants():
    g = relevance_fig().graph
    rel = relevant_neighbors(g, EMPTY, 0, 5)
    assert not source_orbit_applicable(g, EMPTY, 0, 4, rel)  # s adj only i
    g2 = Graph(6, list(relevance_fig().graph.edges) + [(4, 2), (4, 3)])
    rel2 = relevant_neighbors(g2, EMPTY, 0, 5)
    assert source_orbit_applicable(g2, EMPTY, 0, 4, rel2)
    assert source_paths_applicable(g2, EMPTY, 0, 4, 5, rel2)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_k4_pattern_verifies_all_subsets():
    from failover_lab.constructions import target_removal_pattern

    k4 = Graph(4, itertools.combinations(range(4), 2))
    rep = verify(k4, target_removal_pattern(k4, 3), 3, Family.all_subsets())
    assert rep.verdict
    assert rep.failure_sets_checked == 64


def test_outerplanar_skipping_verifies_exhaustively():
    from failover_lab.constructions import outerplanar_pattern
    from failover_lab.graph import find_outerplanar_rotation

    g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 2), (2, 4)])
    gr = g.with_rotation(find_outerplanar_rotation(g))
    rep = verify(gr, outerplanar_pattern(gr, 3), 3, Family.all_subsets())
    assert rep.verdict and rep.failure_sets_checked == 2**8


def test_orbit_violation_is_caught_by_adversarial_family():
    # A bouncing rule at a two-relay node fails under the family that leaves
    # one relay as the only way out.
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])  # cycle, target 0
    p = PatternTable()
    p.set(2, EMPTY, 1, 1)
    p.set(2, EMPTY, 3, 3)
    p.set(1, EMPTY, None, 2)
    p.set(1, EMPTY, 2, 2)
    p.set(1, frozenset({(0, 1)}), 2, 2)
    p.set(1, frozenset({(0, 1)}), None, 2)
    adversarial = Family.explicit([[(0, 1)]], name="strand")
    rep = verify(g, p, 0, adversarial)
    assert not rep.verdict
    failed, src, trace = rep.counterexample
    assert failed == {(0, 1)}
    assert trace.outcome in ("loop", "dead")


def test_verdict_monotone_in_family():
    from failover_lab.constructions import target_removal_pattern

    k4 = Graph(4, itertools.combinations(range(4), 2))
    p = target_removal_pattern(k4, 3)
    assert verify(k4, p, 3, Family.all_subsets()).verdict
    assert verify(k4, p, 3, Family.all_subsets(max_size=2)).verdict
    assert verify(k4, p, 3, Family.explicit([[(0, 3)]])).verdict


def test_enumeration_limit_and_budget_guard(monkeypatch):
    big = Graph(24, [(i, i + 1) for i in range(23)])
    with pytest.raises(LimitError):
        list(Family.all_subsets().enumerate(big))
    from failover_lab.constructions import target_removal_pattern

    k4 = Graph(4, itertools.combinations(range(4), 2))
    monkeypatch.setenv("FAILOVER_LAB_BUDGET", "10")
    with pytest.raises(LimitError):
        verify(k4, target_removal_pattern(k4, 3), 3, Family.all_subsets())


def test_family_sizes():
    g = Graph(4, itertools.combinations(range(4), 2))
    assert Family.all_subsets().size(g) == 64
    assert Family.all_subsets(max_size=1).size(g) == 7
    assert Family.explicit([[(0, 1)]]).size(g) == 1
