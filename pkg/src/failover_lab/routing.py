"""Deterministic packet simulation with exact loop detection.

A route is a walk over states (node, in-port).  The state space has at most
2m + 1 elements, so every simulation halts within 2m + 2 hops; the engine
enforces that bound defensively on top of exact state-revisit detection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .forwarding import InPort, IsolatedNode, Pattern, UndefinedEntry
from .graph import Edge, Graph, GraphError, component, edge, local_failures

DELIVERED = "delivered"
LOOP = "loop"
DEAD = "dead"
NOT_APPLICABLE = "not_applicable"

REASON_ISOLATED = "isolated"
REASON_UNDEFINED = "undefined"


class EngineError(AssertionError):
    """The defensive hop bound was violated; indicates an engine bug."""


@dataclass(frozen=True)
class RouteTrace:
    source: int
    target: int
    hops: tuple[tuple[int, InPort, int], ...]
    outcome: str
    loop_index: Optional[int] = None
    dead_reason: Optional[str] = None

    @property
    def delivered(self) -> bool:
        return self.outcome == DELIVERED

    def node_sequence(self) -> tuple[int, ...]:
        """Nodes in visit order, starting at the source."""
        if not self.hops:
            return (self.source,)
        return (self.hops[0][0],) + tuple(out for _, _, out in self.hops)

    def uses_edge(self, u: int, v: int) -> bool:
        e = edge(u, v)
        return any(edge(a, b) == e for a, _, b in self.hops)


def route(g: Graph, failed: frozenset[Edge], p: Pattern, src: int, tgt: int) -> RouteTrace:
    """Simulate one packet from src toward tgt under the failure set.

    Outcomes: delivered; loop on the first revisited (node, in-port) state;
    dead on an isolated source or a partial-table miss.  A source with every
    incident edge failed reports Dead(isolated); sources merely disconnected
    from the target report NotApplicable without simulating.
    """
    if src not in g.nodes or tgt not in g.nodes:
        raise GraphError(f"unknown node in ({src}, {tgt})")
    if src == tgt:
        raise GraphError("source equals target")
    if all(e in failed for e in g.incident(src)):
        return RouteTrace(src, tgt, (), DEAD, dead_reason=REASON_ISOLATED)
    if tgt not in component(g, failed, src):
        return RouteTrace(src, tgt, (), NOT_APPLICABLE)
    return _simulate(g, failed, p, src, tgt)


def _simulate(g: Graph, failed: frozenset[Edge], p: Pattern, src: int, tgt: int) -> RouteTrace:
    cap = 2 * g.m + 2
    hops: list[tuple[int, InPort, int]] = []
    seen: dict[tuple[int, InPort], int] = {}
    state: tuple[int, InPort] = (src, None)
    eval_src = src if p.source_matching else None
    while True:
        v, inp = state
        seen[state] = len(hops)
        local = local_failures(g, failed, v)
        try:
            out = p.eval(v, inp, local, eval_src)
        except UndefinedEntry:
            return RouteTrace(src, tgt, tuple(hops), DEAD, dead_reason=REASON_UNDEFINED)
        except IsolatedNode:
            return RouteTrace(src, tgt, tuple(hops), DEAD, dead_reason=REASON_ISOLATED)
        if out not in g.neighbors(v) or edge(v, out) in failed:
            raise GraphError(f"pattern returned a dead out-port {out} at node {v}")
        hops.append((v, inp, out))
        if out == tgt:
            return RouteTrace(src, tgt, tuple(hops), DELIVERED)
        state = (out, v)
        if state in seen:
            return RouteTrace(src, tgt, tuple(hops), LOOP, loop_index=seen[state])
        if len(hops) >= cap:
            raise EngineError(f"trace exceeded {cap} hops without a state revisit")


def route_all_sources(g: Graph, failed: frozenset[Edge], p: Pattern, tgt: int) -> list[RouteTrace]:
    """One trace per node in tgt's component; disconnected nodes are NotApplicable."""
    if p.source_matching:
        raise GraphError("route_all_sources requires a pattern without source matching")
    comp = component(g, failed, tgt)
    traces = []
    for src in sorted(g.nodes):
        if src == tgt:
            continue
        if src in comp:
            traces.append(_simulate(g, failed, p, src, tgt))
        else:
            traces.append(RouteTrace(src, tgt, (), NOT_APPLICABLE))
    return traces
