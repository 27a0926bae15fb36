import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failover_lab.forwarding import PatternTable, SkippingPattern, SkippingRule
from failover_lab.gadgets import counter_fig, feigenbaum13
from failover_lab.graph import EMPTY, Graph, GraphError, edge, failure_set
from failover_lab.routing import (
    DEAD,
    DELIVERED,
    LOOP,
    NOT_APPLICABLE,
    REASON_ISOLATED,
    REASON_UNDEFINED,
    route,
    route_all_sources,
)

PATH3 = Graph(3, [(0, 1), (1, 2)])


def forward_skipping(g: Graph) -> SkippingPattern:
    return SkippingPattern(
        {v: SkippingRule.from_cycle(list(g.neighbors(v))) for v in g.nodes if g.neighbors(v)}
    )


def test_path_delivery():
    tr = route(PATH3, EMPTY, forward_skipping(PATH3), 0, 2)
    assert tr.outcome == DELIVERED
    assert len(tr.hops) == 2
    assert tr.node_sequence() == (0, 1, 2)


def bounce_pattern_for_counter_fig() -> PatternTable:
    # t=0, x=1, u=2, v=3, w=4; (t,v) failed: u sends to v, v bounces, u then
    # relays to x which delivers.
    g = counter_fig().graph
    t = PatternTable()
    t.set(2, EMPTY, None, 3)
    t.set(3, frozenset({(0, 3)}), 2, 2)
    t.set(2, EMPTY, 3, 1)
    t.set(1, EMPTY, 2, 0)
    return t


def test_counter_fig_bounce_delivers():
    gd = counter_fig()
    g = gd.graph
    f = failure_set(g, [(0, 3)])
    tr = route(g, f, bounce_pattern_for_counter_fig(), 2, 0)
    assert tr.outcome == DELIVERED
    assert tr.node_sequence() == (2, 3, 2, 1, 0)


def test_feigenbaum_loop_trace():
    # Center cycle 0->1->2->3->0 with the trapping failure set of its first
    # case: the packet cycles s,4,c,1,13,3,c,4 (ids 12,3,4,0,6,2,4,3).
    gd = feigenbaum13()
    g = gd.graph
    f = failure_set(
        g,
        [(12, 0), (12, 1), (12, 2), (0, 5), (0, 7), (2, 8), (2, 10), (3, 7), (3, 9), (3, 10), (6, 11)],
    )
    t = PatternTable(source_matching=True, source=12)
    view = lambda v: f & g.incident(v)
    t.set(12, view(12), None, 3)
    t.set(3, view(3), 12, 4)
    t.set(4, view(4), 3, 0)
    t.set(0, view(0), 4, 6)
    t.set(6, view(6), 0, 2)
    t.set(2, view(2), 6, 4)
    t.set(4, view(4), 2, 3)
    t.set(3, view(3), 4, 12)
    t.set(12, view(12), 3, 3)
    tr = route(g, f, t, 12, 11)
    assert tr.outcome == LOOP
    seq = tr.node_sequence()
    expected = (12, 3, 4, 0, 6, 2, 4, 3)
    assert any(seq[i : i + 8] == expected for i in range(len(seq)))


def test_route_all_sources_k4():
    from failover_lab.constructions import target_removal_pattern

    k4 = Graph(4, itertools.combinations(range(4), 2))
    p = target_removal_pattern(k4, 3)
    traces = route_all_sources(k4, EMPTY, p, 3)
    assert len(traces) == 3
    assert all(t.outcome == DELIVERED for t in traces)


def test_route_all_sources_star_one_live():
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    f = failure_set(g, [(0, 2), (0, 3), (0, 4)])
    p = forward_skipping(g)
    traces = route_all_sources(g, f, p, 0)
    applicable = [t for t in traces if t.outcome != NOT_APPLICABLE]
    assert len(applicable) == 1 and applicable[0].source == 1


def test_route_all_sources_c4_single_failures():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    from failover_lab.constructions import outerplanar_pattern
    from failover_lab.graph import find_outerplanar_rotation

    gr = g.with_rotation(find_outerplanar_rotation(g))
    p = outerplanar_pattern(gr, 0)
    for e in sorted(g.edges):
        traces = route_all_sources(gr, frozenset({e}), p, 0)
        assert sum(t.outcome == DELIVERED for t in traces) == 3


def test_isolated_source_vs_not_applicable():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    p = forward_skipping(g)
    all_failed = failure_set(g, [(0, 1)])
    tr = route(g, all_failed, p, 0, 3)
    assert tr.outcome == DEAD and tr.dead_reason == REASON_ISOLATED
    # live but disconnected source
    g2 = Graph(4, [(0, 1), (2, 3)])
    tr2 = route(g2, EMPTY, forward_skipping(g2), 0, 3)
    assert tr2.outcome == NOT_APPLICABLE
    # the same source in a batch run is marked not applicable
    batch = route_all_sources(g, all_failed, p, 3)
    assert batch[0].outcome == NOT_APPLICABLE


def test_partial_table_dead_undefined():
    tr = route(PATH3, EMPTY, PatternTable(), 0, 2)
    assert tr.outcome == DEAD and tr.dead_reason == REASON_UNDEFINED


def test_route_rejects_equal_endpoints():
    with pytest.raises(GraphError):
        route(PATH3, EMPTY, forward_skipping(PATH3), 1, 1)


def test_loop_detection_index():
    g = Graph(3, [(0, 1), (1, 2)])
    t = PatternTable()
    t.set(0, EMPTY, None, 1)
    t.set(1, EMPTY, 0, 0)
    t.set(0, EMPTY, 1, 1)
    tr = route(g, EMPTY, t, 0, 2)
    assert tr.outcome == LOOP
    assert tr.loop_index == 1  # state (1, in 0) first entered at hop 1


def test_determinism():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])
    p = forward_skipping(g)
    f = failure_set(g, [(1, 2)])
    t1 = route(g, f, p, 0, 3)
    t2 = route(g, f, p, 0, 3)
    assert t1 == t2


@st.composite
def small_graph_and_failures(draw):
    n = draw(st.integers(3, 6))
    all_edges = list(itertools.combinations(range(n), 2))
    chosen = [e for e in all_edges if draw(st.booleans())]
    tree = [(i, draw(st.integers(0, i - 1))) for i in range(1, n)]
    edges = {edge(*e) for e in chosen} | {edge(*e) for e in tree}
    g = Graph(n, edges)
    failed = frozenset(e for e in sorted(g.edges) if draw(st.booleans()))
    return g, failed


@settings(max_examples=150, deadline=None)
@given(small_graph_and_failures(), st.randoms(use_true_random=False))
def test_termination_bound_random(gf, rng):
    g, failed = gf
    # random total table: arbitrary live out-port per key
    table = PatternTable()
    for v in sorted(g.nodes):
        incident = sorted(g.incident(v))
        for r in range(len(incident) + 1):
            for fail in itertools.combinations(incident, r):
                local = frozenset(fail)
                live = [u for u in g.neighbors(v) if edge(u, v) not in local]
                if not live:
                    continue
                for inp in [None, *live]:
                    table.set(v, local, inp, rng.choice(live))
    for src in sorted(g.nodes)[1:]:
        tr = route(g, failed, table, src, 0)
        assert len(tr.hops) <= 2 * g.m + 2
        assert tr.outcome in (DELIVERED, LOOP, DEAD, NOT_APPLICABLE)
        if tr.outcome == DELIVERED:
            assert tr.hops[-1][2] == 0  # no mis-delivery, ever


def test_skipping_never_uses_failed_edge_exhaustive():
    # All failure sets on two embedded shapes with m <= 12.
    from failover_lab.constructions import outerplanar_pattern
    from failover_lab.graph import find_outerplanar_rotation

    shapes = [
        Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 2), (2, 4)]),
        Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]),
    ]
    for g in shapes:
        gr = g.with_rotation(find_outerplanar_rotation(g))
        p = outerplanar_pattern(gr, 0)
        for r in range(g.m + 1):
            for combo in itertools.combinations(sorted(g.edges), r):
                f = frozenset(combo)
                for tr in route_all_sources(gr, f, p, 0):
                    for v, _, out in tr.hops:
                        assert edge(v, out) not in f
