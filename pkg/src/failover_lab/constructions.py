"""Constructive forwarding patterns: face routing and near-target probing.

All of them are skipping-style: a node reacts to failures only by moving on
to the next port in a predefined order.
"""

from __future__ import annotations

from typing import Optional

from .forwarding import IsolatedNode, Pattern, ProceduralPattern, SkippingPattern, SkippingRule
from .graph import (
    EMPTY,
    Edge,
    Graph,
    GraphError,
    canonical_walk_start,
    components,
    edge,
    face_census,
    find_outerplanar_rotation,
    induced_remove,
    is_planar_rotation,
    outer_face_walk,
    validate_outerplanar,
)


class ConstructionError(GraphError):
    pass


def _first_live(g: Graph, v: int, local: frozenset[Edge]) -> int:
    for u in g.neighbors(v):
        if edge(u, v) not in local:
            return u
    raise IsolatedNode(f"node {v} has no live port")


def _walk_starts(g: Graph) -> dict[int, int]:
    """First out-port of each node along the canonical outer-face walk."""
    walk = outer_face_walk(g, EMPTY, *canonical_walk_start(g))
    starts: dict[int, int] = {}
    for v, w in walk.hops:
        starts.setdefault(v, w)
    return starts


def _rotation_rules(g: Graph, starts: dict[int, int]) -> dict[int, SkippingRule]:
    rules = {}
    for v in g.nodes:
        order = g.rotation[v]
        if not order:
            continue
        succ = {order[k]: order[(k + 1) % len(order)] for k in range(len(order))}
        rules[v] = SkippingRule(tuple(sorted(succ.items())), starts[v])
    return rules


def outerplanar_pattern(g: Graph, tgt: int) -> SkippingPattern:
    """Right-hand-rule face routing on an outerplanar embedding.

    Every node forwards to the rotation successor of its in-port, skipping
    failed links; origination enters the outer face in the canonical
    direction.  Perfectly resilient, and target-oblivious: the walk visits
    every node of the component.
    """
    if g.rotation is None or not validate_outerplanar(g):
        raise ConstructionError("graph needs a validated outerplanar rotation")
    if tgt not in g.nodes:
        raise ConstructionError(f"unknown target {tgt}")
    return SkippingPattern(_rotation_rules(g, _walk_starts(g)))


def sameface_pattern(g: Graph, tgt: int) -> tuple[SkippingPattern, frozenset[int]]:
    """Face routing for planar graphs, started on a face shared with the target.

    Returns the pattern and the set of covered sources (those sharing a face
    with tgt in the embedding).  Uncovered sources get an arbitrary start and
    no delivery guarantee.
    """
    if g.rotation is None:
        raise ConstructionError("graph needs a rotation")
    if not is_planar_rotation(g):
        raise ConstructionError("rotation is not a planar embedding")
    faces = face_census(g)
    shared = [f for f in faces if any(v == tgt for v, _ in f)]
    starts: dict[int, int] = {}
    covered = set()
    for face in shared:
        for v, w in face:
            if v not in starts:
                starts[v] = w
                covered.add(v)
    for v in g.nodes:
        if v not in starts and g.neighbors(v):
            starts[v] = g.rotation[v][0]
    return SkippingPattern(_rotation_rules(g, starts)), frozenset(covered - {tgt})


def target_removal_pattern(g: Graph, tgt: int) -> ProceduralPattern:
    """Forward to the target whenever its link is alive; otherwise face-route
    the graph without the target, whose components must be outerplanar.

    The face walk visits every surviving node of a component, and each visit
    retries the target link, which is exactly what delivers on K4.
    """
    if tgt not in g.nodes:
        raise ConstructionError(f"unknown target {tgt}")
    rest = induced_remove(g, drop_nodes=[tgt])
    succ: dict[int, dict[int, int]] = {}
    starts: dict[int, int] = {}
    for comp in components(rest):
        sub = Graph(comp, (e for e in rest.edges if e[0] in comp and e[1] in comp))
        if sub.n == 1:
            continue
        rot = find_outerplanar_rotation(sub)
        if rot is None:
            raise ConstructionError("graph minus target is not outerplanar")
        sub = sub.with_rotation(rot)
        sub_starts = _walk_starts(sub)
        for v in comp:
            order = rot[v]
            succ[v] = {order[k]: order[(k + 1) % len(order)] for k in range(len(order))}
            starts[v] = sub_starts[v]

    def rule(v: int, in_port: Optional[int], local: frozenset[Edge], src: Optional[int]) -> int:
        if v == tgt:
            return _first_live(g, v, local)  # never routed; keeps tables total
        if edge(v, tgt) in g.edges and edge(v, tgt) not in local:
            return tgt
        ring = succ.get(v)
        if ring is None:
            raise IsolatedNode(f"node {v} has no live port")
        cur = starts[v] if in_port is None or in_port == tgt else ring[in_port]
        for _ in range(len(ring)):
            if edge(v, cur) not in local:
                return cur
            cur = ring[cur]
        raise IsolatedNode(f"node {v} has no live port")

    return ProceduralPattern("target-removal", {"tgt": tgt}, rule)


def two_hop_source_pattern(g: Graph, src: int, tgt: int) -> ProceduralPattern:
    """Source-matched probing: the source cycles its neighbors, each neighbor
    relays to the target when it can and bounces back otherwise.

    Delivers whenever the source is within two hops of the target after the
    failures; third-party nodes bounce, which keeps the guarantee statement
    exact without ever mis-delivering.
    """
    if src == tgt or src not in g.nodes or tgt not in g.nodes:
        raise ConstructionError("bad source/target")
    relays = sorted(u for u in g.neighbors(src) if u != tgt and g.has_edge(u, tgt))
    rest = sorted(u for u in g.neighbors(src) if u != tgt and u not in relays)
    order = ([tgt] if g.has_edge(src, tgt) else []) + relays + rest
    ring = {order[k]: order[(k + 1) % len(order)] for k in range(len(order))} if order else {}

    def rule(v: int, in_port: Optional[int], local: frozenset[Edge], _s: Optional[int]) -> int:
        if v == src:
            cur = order[0] if in_port is None else ring[in_port]
            for _ in range(len(order)):
                if edge(v, cur) not in local:
                    return cur
                cur = ring[cur]
            raise IsolatedNode(f"source {src} has no live port")
        if v == tgt:
            return _first_live(g, v, local)  # never routed; keeps tables total
        if edge(v, tgt) in g.edges and edge(v, tgt) not in local:
            return tgt
        if in_port is not None:
            return in_port  # bounce, including back toward the source
        return _first_live(g, v, local)

    return ProceduralPattern(
        "two-hop-source", {"src": src, "tgt": tgt}, rule, source_matching=True, source=src
    )


def two_hop_id_pattern(g: Graph, tgt: int) -> ProceduralPattern:
    """Identifier descent: forward to the target if adjacent, else toward the
    lowest live id; local minima probe their neighbors cyclically.

    Delivers from everywhere when every node ends up within two hops of the
    target after the failures.
    """
    if tgt not in g.nodes:
        raise ConstructionError(f"unknown target {tgt}")
    rings = {}
    for v in g.nodes:
        order = sorted(g.neighbors(v))
        if order:
            rings[v] = ({order[k]: order[(k + 1) % len(order)] for k in range(len(order))}, order[0])

    def rule(v: int, in_port: Optional[int], local: frozenset[Edge], _s: Optional[int]) -> int:
        if v == tgt:
            return _first_live(g, v, local)  # never routed; keeps tables total
        live = [u for u in g.neighbors(v) if edge(u, v) not in local]
        if not live:
            raise IsolatedNode(f"node {v} has no live port")
        if edge(v, tgt) in g.edges and edge(v, tgt) not in local:
            return tgt
        lowest = min(live)
        if lowest < v:
            return lowest
        ring, first = rings[v]
        cur = first if in_port is None else ring[in_port]
        for _ in range(len(ring)):
            if edge(v, cur) not in local:
                return cur
            cur = ring[cur]
        raise IsolatedNode(f"node {v} has no live port")

    return ProceduralPattern("two-hop-id", {"tgt": tgt}, rule)


PROCEDURAL_BUILDERS = {
    "target-removal": lambda g, params: target_removal_pattern(g, params["tgt"]),
    "two-hop-source": lambda g, params: two_hop_source_pattern(g, params["src"], params["tgt"]),
    "two-hop-id": lambda g, params: two_hop_id_pattern(g, params["tgt"]),
}
