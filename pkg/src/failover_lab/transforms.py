"""Pattern-preserving transformations.

Subgraph and contraction transfers turn a resilient pattern on a graph into
one on any minor; composing them walks the whole minor relation.  Each
transfer also lifts failure sets backwards, which is how an impossibility
family on a minor becomes a targeted family on the host graph.

Transferred patterns are materialized as tables so they stay inspectable
and serializable; keys the original pattern never defined are simply left
out (a partial pattern stays partial).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

from .forwarding import (
    EvalError,
    InPort,
    Pattern,
    PatternTable,
    SkippingPattern,
    SkippingRule,
)
from .graph import (
    EMPTY,
    Edge,
    Graph,
    GraphError,
    component,
    contract_edge,
    edge,
    induced_remove,
    subdivide3,
)
from .routing import RouteTrace, route


class TransferError(GraphError):
    pass


class NonBijectiveError(TransferError):
    """Extracted successor function is not a permutation; carries a witness."""

    def __init__(self, node: int, mapping: dict):
        super().__init__(f"extracted map at node {node} is not a bijection: {mapping}")
        self.node = node
        self.mapping = mapping


@dataclass(frozen=True)
class SubgraphStep:
    drop_edges: frozenset[Edge]
    drop_nodes: frozenset[int]


@dataclass(frozen=True)
class ContractionStep:
    i: int
    j: int


TransferStep = Union[SubgraphStep, ContractionStep]


def _materialize(gp: Graph, entry_fn, source_matching: bool, source: Optional[int]) -> PatternTable:
    table = PatternTable(source_matching=source_matching, source=source)
    for v in sorted(gp.nodes):
        incident = sorted(gp.incident(v))
        for r in range(len(incident) + 1):
            for fail in itertools.combinations(incident, r):
                local = frozenset(fail)
                live = [u for u in gp.neighbors(v) if edge(u, v) not in local]
                if not live:
                    continue
                for inp in [None, *live]:
                    out = entry_fn(v, local, inp)
                    if out is not None:
                        table.set(v, local, inp, out)
    return table


def subgraph_transfer(a: Pattern, g: Graph, gp: Graph) -> PatternTable:
    """Run `a` in a context where everything outside the subgraph has failed.

    The transferred table satisfies A'(F') = A(F' + dropped edges) entrywise;
    perfect resilience on g carries over to gp.
    """
    if not (gp.nodes <= g.nodes and gp.edges <= g.edges):
        raise TransferError("not a subgraph")
    if g.target is not None and g.target not in gp.nodes:
        raise TransferError("subgraph does not retain the target")
    if a.source_matching and a.source is not None and a.source not in gp.nodes:
        raise TransferError("subgraph does not retain the source")
    dropped = g.edges - gp.edges
    src = a.source if a.source_matching else None

    def entry(v: int, local: frozenset[Edge], inp: InPort) -> Optional[int]:
        lifted = local | (dropped & g.incident(v))
        try:
            return a.eval(v, inp, lifted, src)
        except EvalError:
            return None

    return _materialize(gp, entry, a.source_matching, src)


def contract_pattern(a: Pattern, g: Graph, i: int, j: int) -> tuple[Graph, PatternTable]:
    """Transfer `a` through the (i,j)-contraction.

    Unaffected nodes evaluate `a` with the redundant parallel edges R failed;
    former neighbors of j get their j-port rewritten to i; the merged node
    chases the packet through the internal i-j hops, with an undefined sink
    when the chase ping-pongs forever.
    """
    gp, redundant = contract_edge(g, i, j)
    src = a.source if a.source_matching else None
    if src == j:
        src = i

    def lift_edge(v: int, u: int) -> Edge:
        # gp edge (v,u) as a g edge, from v's side.
        if u == i and edge(v, i) not in g.edges:
            return edge(v, j)
        if v == i and edge(u, i) not in g.edges:
            return edge(u, j)
        return edge(v, u)

    def entry_plain(v: int, local: frozenset[Edge], inp: InPort) -> Optional[int]:
        lifted = frozenset(lift_edge(v, u) for (x, y) in local for u in ((y,) if x == v else (x,)))
        lifted |= redundant & g.incident(v)
        g_in = inp
        if inp == i and edge(v, i) not in g.edges:
            g_in = j
        try:
            out = a.eval(v, g_in, lifted, src)
        except EvalError:
            return None
        return i if out == j else out

    def entry_merged(local: frozenset[Edge], inp: InPort) -> Optional[int]:
        lifted = frozenset(lift_edge(i, u) for (x, y) in local for u in ((y,) if x == i else (x,)))
        lifted |= redundant
        local_i = (lifted & g.incident(i)) - {edge(i, j)}
        local_j = (lifted & g.incident(j)) - {edge(i, j)}
        if inp is None:
            side, cur = i, None
        elif edge(inp, i) in g.edges and edge(inp, i) not in lifted:
            side, cur = i, inp
        else:
            side, cur = j, inp
        seen = set()
        while True:
            if (side, cur) in seen:
                return None  # permanent internal ping-pong: undefined sink
            seen.add((side, cur))
            try:
                out = a.eval(side, cur, local_i if side == i else local_j, src)
            except EvalError:
                return None
            if out == (j if side == i else i):
                side, cur = out, side
                continue
            return out

    def entry(v: int, local: frozenset[Edge], inp: InPort) -> Optional[int]:
        if v == i:
            return entry_merged(local, inp)
        return entry_plain(v, local, inp)

    return gp, _materialize(gp, entry, a.source_matching, src)


def lift_failure_set(g: Graph, steps: list[TransferStep], failed: frozenset[Edge]) -> frozenset[Edge]:
    """Map a failure set on the final minor back to one on g.

    A refutation of the transferred pattern under F maps to a refutation of
    the original under the lift: dropped edges rejoin as failures, contracted
    ports map back, and every redundant set R accumulates.
    """
    graphs = [g]
    for step in steps:
        graphs.append(apply_step_to_graph(graphs[-1], step)[0])
    lifted = failed
    for step, before in zip(reversed(steps), reversed(graphs[:-1])):
        if isinstance(step, SubgraphStep):
            incident = frozenset(
                e for n in step.drop_nodes for e in before.incident(n)
            )
            lifted = lifted | step.drop_edges | incident
        else:
            _, redundant = contract_edge(before, step.i, step.j)
            mapped = set()
            for u, v in lifted:
                if step.i in (u, v):
                    other = v if u == step.i else u
                    if edge(step.i, other) in before.edges:
                        mapped.add(edge(step.i, other))
                    else:
                        mapped.add(edge(step.j, other))
                else:
                    mapped.add(edge(u, v))
            lifted = frozenset(mapped) | redundant
    return lifted


def apply_step_to_graph(g: Graph, step: TransferStep) -> tuple[Graph, Optional[frozenset[Edge]]]:
    if isinstance(step, SubgraphStep):
        return induced_remove(g, step.drop_edges, step.drop_nodes), None
    gp, redundant = contract_edge(g, step.i, step.j)
    return gp, redundant


def minor_transfer(a: Pattern, g: Graph, steps: list[TransferStep]) -> tuple[Graph, Pattern]:
    """Compose subgraph and contraction transfers along the step list."""
    cur_g, cur_p = g, a
    for step in steps:
        if isinstance(step, SubgraphStep):
            nxt = induced_remove(cur_g, step.drop_edges, step.drop_nodes)
            cur_p = subgraph_transfer(cur_p, cur_g, nxt)
            cur_g = nxt
        elif isinstance(step, ContractionStep):
            cur_g, cur_p = contract_pattern(cur_p, cur_g, step.i, step.j)
        else:
            raise TransferError(f"unknown step {step!r}")
    return cur_g, cur_p


def minor_steps(g: Graph, embedding: dict[int, frozenset[int]]) -> tuple[list[TransferStep], dict[int, int]]:
    """Steps realizing a minor from its branch sets, plus h-node -> survivor map.

    Deletes everything outside the branch sets, then contracts each branch
    set onto its minimum node along a spanning tree, leaves first.
    """
    used = frozenset().union(*embedding.values())
    extra_nodes = g.nodes - used
    steps: list[TransferStep] = []
    cur = g
    if extra_nodes:
        steps.append(SubgraphStep(frozenset(), frozenset(extra_nodes)))
        cur = induced_remove(cur, (), extra_nodes)
    reps = {h: min(bs) for h, bs in embedding.items()}
    for h in sorted(embedding, key=lambda x: reps[x]):
        bs = embedding[h]
        rep = reps[h]
        # Spanning tree of the branch set rooted at rep; contract leaves up.
        parent = {rep: None}
        order = [rep]
        frontier = [rep]
        while frontier:
            x = frontier.pop()
            for y in cur.neighbors(x):
                if y in bs and y not in parent:
                    parent[y] = x
                    order.append(y)
                    frontier.append(y)
        if set(order) != set(bs):
            raise TransferError(f"branch set {sorted(bs)} is not connected")
        for y in reversed(order):
            if y == rep:
                continue
            steps.append(ContractionStep(parent[y], y))
            cur, _ = contract_edge(cur, parent[y], y)
    return steps, reps


def path_correspondence(
    a: Pattern,
    g: Graph,
    i: int,
    j: int,
    f_prime: frozenset[Edge],
    src: int,
    tgt: int,
) -> bool:
    """Check the contraction trace identity Q' = P'.

    P runs `a` on g under the lifted failures, P' runs the contracted pattern
    on the contracted graph under f_prime; rewriting j to i in P and dropping
    the internal (i,i) repeats must reproduce P' exactly.
    """
    gp, ap = contract_pattern(a, g, i, j)
    lifted = lift_failure_set(g, [ContractionStep(i, j)], f_prime)
    src_g = i if src == j else src
    p = route(g, lifted, a, src_g, tgt)
    pp = route(gp, f_prime, ap, src_g if src_g != j else i, tgt)
    rewritten = [i if x == j else x for x in p.node_sequence()]
    collapsed = [rewritten[0]]
    for x in rewritten[1:]:
        if x != collapsed[-1]:
            collapsed.append(x)
    return tuple(collapsed) == pp.node_sequence() and p.outcome == pp.outcome


# ---------------------------------------------------------------------------
# Subdivision to skipping
# ---------------------------------------------------------------------------


def cut_directions(phi: Pattern, g: Graph) -> frozenset[tuple[int, int]]:
    """Directed pairs (u, v) whose subdivided link can never carry a packet
    from u to v: one of the two new nodes bounces it straight back.

    New nodes only ever see an empty local view besides their middle link,
    so the check is a pair of failure-free probes per direction.  A probe
    the pattern leaves undefined blocks the direction as well.
    """
    h, middle = subdivide3(g)
    blocked = set()
    for u, v in sorted(g.edges):
        a, b = middle[(u, v)]
        u_side, v_side = (a, b) if h.has_edge(u, a) else (b, a)
        for frm, to, near, far in ((u, v, u_side, v_side), (v, u, v_side, u_side)):
            try:
                first = phi.eval(near, frm, EMPTY)
                second = phi.eval(far, near, EMPTY)
            except EvalError:
                blocked.add((frm, to))
                continue
            if first == frm or second == near:
                blocked.add((frm, to))
    return frozenset(blocked)


def derive_skipping(phi: Pattern, g: Graph, tgt: int) -> SkippingPattern:
    """Extract a skipping pattern on g from a pattern on its 3-subdivision.

    Old nodes never see failures in the middle-link model, so their behavior
    is a single successor function; translated back to g it must be a
    permutation (otherwise NonBijectiveError).  Cut directions become dead
    ports that the skipping evaluation passes over, mirroring the tail
    modification of the simulation argument.
    """
    h, middle = subdivide3(g)
    side: dict[tuple[int, int], int] = {}
    for u, v in g.edges:
        a, b = middle[(u, v)]
        if h.has_edge(u, a):
            side[(u, v)], side[(v, u)] = a, b
        else:
            side[(u, v)], side[(v, u)] = b, a
    blocked = cut_directions(phi, g)
    rules: dict[int, SkippingRule] = {}
    for v in sorted(g.nodes):
        if not g.neighbors(v):
            continue
        back = {side[(v, x)]: x for x in g.neighbors(v)}
        mapping: dict[int, int] = {}
        try:
            for x in g.neighbors(v):
                mapping[x] = back[phi.eval(v, side[(v, x)], EMPTY)]
            start = back[phi.eval(v, None, EMPTY)]
        except EvalError as exc:
            raise TransferError(f"pattern undefined at old node {v}: {exc}") from exc
        if sorted(mapping.values()) != sorted(g.neighbors(v)):
            raise NonBijectiveError(v, mapping)
        dead = tuple(sorted(x for x in g.neighbors(v) if (v, x) in blocked))
        rules[v] = SkippingRule(tuple(sorted(mapping.items())), start, dead)
    return SkippingPattern(rules, phi.source_matching, phi.source)


def old_node_sequence(trace: RouteTrace, old_nodes: frozenset[int]) -> tuple[int, ...]:
    """Subsequence of a subdivision trace restricted to original nodes."""
    return tuple(x for x in trace.node_sequence() if x in old_nodes)
