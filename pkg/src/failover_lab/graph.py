"""Undirected simple graphs with rotation systems, failures, and structural ops.

Node ids are integers.  Gadget constructors produce dense ids 0..n-1;
derived graphs (contractions, removals) keep the surviving original ids so
that forwarding entries stay addressable across transformations.

Edges are canonical tuples ``(u, v)`` with ``u < v``.  A failure set is a
frozenset of such tuples; :func:`failure_set` validates membership.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

Edge = tuple[int, int]
Rotation = dict[int, tuple[int, ...]]

EMPTY: frozenset[Edge] = frozenset()


class GraphError(ValueError):
    """Invalid graph construction or operation argument."""


class LimitError(GraphError):
    """A brute-force size limit was exceeded."""


def edge(u: int, v: int) -> Edge:
    if u == v:
        raise GraphError(f"self-loop at node {u}")
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable undirected simple graph.

    The optional rotation system maps each node to the cyclic order of its
    neighbors (a combinatorial embedding).  ``target`` and ``source`` are
    designated nodes used by routing and synthesis.
    """

    __slots__ = ("nodes", "edges", "rotation", "target", "source", "_adj", "_incident")

    def __init__(
        self,
        nodes: int | Iterable[int],
        edges: Iterable[Sequence[int]],
        rotation: Optional[Mapping[int, Sequence[int]]] = None,
        target: Optional[int] = None,
        source: Optional[int] = None,
    ):
        if isinstance(nodes, int):
            node_set = frozenset(range(nodes))
        else:
            node_set = frozenset(nodes)
        edge_set = frozenset(edge(u, v) for u, v in edges)
        for u, v in edge_set:
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u},{v}) has endpoint outside the node set")
        adj: dict[int, list[int]] = {v: [] for v in node_set}
        for u, v in edge_set:
            adj[u].append(v)
            adj[v].append(u)
        self.nodes: frozenset[int] = node_set
        self.edges: frozenset[Edge] = edge_set
        self._adj: dict[int, tuple[int, ...]] = {v: tuple(sorted(ns)) for v, ns in adj.items()}
        self._incident: dict[int, frozenset[Edge]] = {
            v: frozenset(edge(v, u) for u in ns) for v, ns in adj.items()
        }
        if rotation is not None:
            rot: Rotation = {}
            for v, order in rotation.items():
                if v not in node_set:
                    raise GraphError(f"rotation for unknown node {v}")
                if sorted(order) != list(self._adj[v]):
                    raise GraphError(f"rotation[{v}] is not a permutation of the neighbors of {v}")
                rot[v] = tuple(order)
            missing = {v for v in node_set if self._adj[v] and v not in rot}
            if missing:
                raise GraphError(f"rotation missing for nodes {sorted(missing)}")
            self.rotation: Optional[Rotation] = rot
        else:
            self.rotation = None
        for name, x in (("target", target), ("source", source)):
            if x is not None and x not in node_set:
                raise GraphError(f"{name} {x} is not a node")
        if target is not None and target == source:
            raise GraphError("target and source must differ")
        self.target = target
        self.source = source

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def incident(self, v: int) -> frozenset[Edge]:
        return self._incident[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return edge(u, v) in self.edges

    def with_rotation(self, rotation: Mapping[int, Sequence[int]]) -> "Graph":
        return Graph(self.nodes, self.edges, rotation, self.target, self.source)

    def with_markers(self, target: Optional[int] = None, source: Optional[int] = None) -> "Graph":
        return Graph(self.nodes, self.edges, self.rotation, target, source)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, target={self.target}, source={self.source})"


def failure_set(g: Graph, pairs: Iterable[Sequence[int]]) -> frozenset[Edge]:
    """Canonicalize and validate a failure set against g's edges."""
    failed = frozenset(edge(u, v) for u, v in pairs)
    extra = failed - g.edges
    if extra:
        raise GraphError(f"failures are not edges of the graph: {sorted(extra)}")
    return failed


def local_failures(g: Graph, failed: frozenset[Edge], v: int) -> frozenset[Edge]:
    """Failures incident to v: the only part of the failure set v can see."""
    if v not in g.nodes:
        raise GraphError(f"unknown node {v}")
    return failed & g.incident(v)


def live_neighbors(g: Graph, failed: frozenset[Edge], v: int) -> tuple[int, ...]:
    return tuple(u for u in g.neighbors(v) if edge(u, v) not in failed)


def component(g: Graph, failed: frozenset[Edge], v: int) -> frozenset[int]:
    """Connected component of v in g with failed edges removed."""
    if v not in g.nodes:
        raise GraphError(f"unknown node {v}")
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if y not in seen and edge(x, y) not in failed:
                seen.add(y)
                stack.append(y)
    return frozenset(seen)


def connected(g: Graph, failed: frozenset[Edge], u: int, v: int) -> bool:
    if u not in g.nodes or v not in g.nodes:
        raise GraphError(f"unknown node in ({u}, {v})")
    if u == v:
        return True
    return v in component(g, failed, u)


def components(g: Graph) -> list[frozenset[int]]:
    out = []
    left = set(g.nodes)
    while left:
        c = component(g, EMPTY, next(iter(left)))
        out.append(c)
        left -= c
    return sorted(out, key=min)


def induced_remove(
    g: Graph,
    drop_edges: Iterable[Sequence[int]] = (),
    drop_nodes: Iterable[int] = (),
) -> Graph:
    """Remove the listed edges, then the listed nodes with their incident edges."""
    dropped_e = {edge(u, v) for u, v in drop_edges}
    extra = dropped_e - g.edges
    if extra:
        raise GraphError(f"not edges of the graph: {sorted(extra)}")
    dropped_n = set(drop_nodes)
    extra_n = dropped_n - g.nodes
    if extra_n:
        raise GraphError(f"not nodes of the graph: {sorted(extra_n)}")
    nodes = g.nodes - dropped_n
    edges = {e for e in g.edges if e not in dropped_e and e[0] in nodes and e[1] in nodes}
    rotation = None
    if g.rotation is not None:
        rotation = {
            v: tuple(u for u in g.rotation[v] if u in nodes and edge(u, v) in edges)
            for v in nodes
            if v in g.rotation
        }
    target = g.target if g.target in nodes else None
    source = g.source if g.source in nodes else None
    return Graph(nodes, edges, rotation, target, source)


def subdivide3(g: Graph) -> tuple[Graph, dict[Edge, Edge]]:
    """Replace every edge (u,v) by a path u - uv - vu - v of three links.

    Returns the subdivided graph H and the correspondence from each original
    edge to its middle link (uv, vu).  New node ids start above max(nodes);
    for the k-th edge in sorted order, uv = base + 2k sits on the u side
    (u < v) and vu = base + 2k + 1 on the v side.
    """
    base = (max(g.nodes) + 1) if g.nodes else 0
    new_edges: set[Edge] = set()
    middle: dict[Edge, Edge] = {}
    side_node: dict[tuple[int, int], int] = {}  # (endpoint, other) -> subdivision node
    nodes = set(g.nodes)
    for k, (u, v) in enumerate(sorted(g.edges)):
        uv = base + 2 * k
        vu = base + 2 * k + 1
        nodes.update((uv, vu))
        new_edges.update((edge(u, uv), edge(uv, vu), edge(vu, v)))
        middle[(u, v)] = edge(uv, vu)
        side_node[(u, v)] = uv
        side_node[(v, u)] = vu
    rotation = None
    if g.rotation is not None:
        rotation = {}
        for v in g.nodes:
            rotation[v] = tuple(side_node[(v, u)] for u in g.rotation[v])
        for (u, v) in g.edges:
            uv, vu = side_node[(u, v)], side_node[(v, u)]
            rotation[uv] = (u, vu)
            rotation[vu] = (uv, v)
    h = Graph(nodes, new_edges, rotation, g.target, g.source)
    return h, middle


def contract_edge(g: Graph, i: int, j: int) -> tuple[Graph, frozenset[Edge]]:
    """Contract edge (i,j): j's neighbors are rewired to i, parallels collapse.

    Returns the contracted simple graph and the redundant set
    R = {(j,r) : r common neighbor of i and j}, expressed in g's edges.
    R is exactly what a transferred forwarding pattern must treat as failed.
    """
    if edge(i, j) not in g.edges:
        raise GraphError(f"({i},{j}) is not an edge")
    common = set(g.neighbors(i)) & set(g.neighbors(j))
    redundant = frozenset(edge(j, r) for r in common)
    nodes = g.nodes - {j}
    edges = {e for e in g.edges if j not in e}
    for x in g.neighbors(j):
        if x != i:
            edges.add(edge(i, x))
    target = i if g.target == j else g.target
    source = i if g.source == j else g.source
    if target is not None and target == source:
        source = None
    return Graph(nodes, edges, None, target, source), redundant


# ---------------------------------------------------------------------------
# Rotation systems, face walks, outerplanarity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceWalk:
    """A closed directed walk produced by the right-hand rule."""

    hops: tuple[tuple[int, int], ...]

    def nodes_visited(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.hops)

    def __post_init__(self):
        for (a, b), (c, _) in zip(self.hops, self.hops[1:]):
            if b != c:
                raise GraphError("face walk hops do not chain")
        if self.hops and self.hops[-1][1] != self.hops[0][0]:
            raise GraphError("face walk is not closed")


def _next_live_out(g: Graph, failed: frozenset[Edge], v: int, came_from: int) -> Optional[int]:
    """Right-hand rule: first live rotation successor of the in-port at v."""
    order = g.rotation[v]
    d = len(order)
    idx = order.index(came_from)
    for k in range(1, d + 1):
        w = order[(idx + k) % d]
        if edge(v, w) not in failed:
            return w
    return None


def outer_face_walk(g: Graph, failed: frozenset[Edge], start: int, first_out: int) -> FaceWalk:
    """Walk the face of the directed hop (start, first_out), skipping failures.

    Deterministic; terminates within twice the live edge count because each
    directed live edge is traversed at most once before the first hop repeats.
    """
    if g.rotation is None:
        raise GraphError("graph has no rotation system")
    if edge(start, first_out) in failed or first_out not in g.neighbors(start):
        raise GraphError(f"({start},{first_out}) is not a live edge")
    hops = [(start, first_out)]
    cur = (start, first_out)
    limit = 2 * sum(1 for e in g.edges if e not in failed) + 1
    while True:
        v, w = cur
        nxt = _next_live_out(g, failed, w, v)
        if nxt is None:  # w isolated except for the arrival edge; cannot happen
            raise GraphError(f"walk stranded at {w}")
        cur = (w, nxt)
        if cur == hops[0]:
            return FaceWalk(tuple(hops))
        hops.append(cur)
        if len(hops) > limit:
            raise GraphError("face walk exceeded the directed-edge bound")


def face_census(g: Graph) -> list[tuple[tuple[int, int], ...]]:
    """All faces of the rotation system, each as a closed run of directed hops."""
    if g.rotation is None:
        raise GraphError("graph has no rotation system")
    darts = {(u, v) for u, v in g.edges} | {(v, u) for u, v in g.edges}
    faces = []
    seen: set[tuple[int, int]] = set()
    for d0 in sorted(darts):
        if d0 in seen:
            continue
        face = []
        cur = d0
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            v, w = cur
            cur = (w, _next_live_out(g, EMPTY, w, v))
        faces.append(tuple(face))
    return faces


def is_planar_rotation(g: Graph) -> bool:
    """Euler check: the rotation system embeds g in the plane (g connected)."""
    if g.n <= 1:
        return True
    f = len(face_census(g))
    return g.n - g.m + f == 2


def canonical_walk_start(g: Graph) -> tuple[int, int]:
    v0 = min(v for v in g.nodes if g.degree(v) > 0)
    return v0, g.rotation[v0][0]


def validate_outerplanar(g: Graph) -> bool:
    """Certify the embedding: planar by Euler count, and the face walk from
    the canonical start (lowest node, first rotation entry) visits every node.
    """
    if g.rotation is None:
        raise GraphError("graph has no rotation system")
    if g.n <= 1:
        return True
    if any(g.degree(v) == 0 for v in g.nodes):
        return False
    if not is_planar_rotation(g):
        return False
    walk = outer_face_walk(g, EMPTY, *canonical_walk_start(g))
    return walk.nodes_visited() == g.nodes


def _cyclic_orders(neighbors: tuple[int, ...]):
    # First neighbor pinned: cyclic rotations of the same order are the same
    # embedding, so (d-1)! candidates suffice.
    head, rest = neighbors[0], neighbors[1:]
    for perm in itertools.permutations(rest):
        yield (head, *perm)


def find_outerplanar_rotation(g: Graph, limit: int = 10) -> Optional[Rotation]:
    """Brute-force a rotation certifying outerplanarity, or None.

    Simple outerplanar graphs satisfy m <= 2n-3, which bounds the rotation
    enumeration; denser graphs are rejected immediately.
    """
    if g.n > limit:
        raise LimitError(f"n={g.n} exceeds the brute-force limit {limit}")
    if len(components(g)) > 1:
        raise GraphError("graph must be connected")
    if g.n <= 1:
        return {}
    if g.n >= 2 and g.m > 2 * g.n - 3:
        return None
    order_nodes = sorted(g.nodes)
    choices = [list(_cyclic_orders(g.neighbors(v))) for v in order_nodes]
    for combo in itertools.product(*choices):
        rot = dict(zip(order_nodes, combo))
        cand = g.with_rotation(rot)
        if not is_planar_rotation(cand):
            continue
        all_nodes = g.nodes
        for face in face_census(cand):
            if frozenset(v for v, _ in face) == all_nodes:
                # Rotate the lowest node's order so the canonical walk is
                # this all-node face.
                v0 = order_nodes[0]
                out0 = next(w for v, w in face if v == v0)
                o = rot[v0]
                k = o.index(out0)
                rot[v0] = o[k:] + o[:k]
                result = g.with_rotation(rot)
                assert validate_outerplanar(result)
                return {v: tuple(r) for v, r in rot.items()}
    return None


# ---------------------------------------------------------------------------
# Minors
# ---------------------------------------------------------------------------


def _connected_subsets(g: Graph, allowed: frozenset[int]):
    """Connected vertex subsets within `allowed`, smallest first, each once."""
    by_size: list[list[frozenset[int]]] = [[frozenset((v,)) for v in sorted(allowed)]]
    yield from by_size[0]
    while True:
        nxt: set[frozenset[int]] = set()
        for s in by_size[-1]:
            border = {u for v in s for u in g.neighbors(v) if u in allowed and u not in s}
            for u in border:
                nxt.add(s | {u})
        if not nxt:
            return
        layer = sorted(nxt, key=sorted)
        by_size.append(layer)
        yield from layer


def find_minor_embedding(g: Graph, h: Graph, limit: int = 10) -> Optional[dict[int, frozenset[int]]]:
    """Branch sets witnessing h as a minor of g, or None.

    Brute-force search over connected branch sets; intended for desk-scale
    graphs (the limit guards g's size).
    """
    if g.n > limit:
        raise LimitError(f"n={g.n} exceeds the brute-force limit {limit}")
    if h.n > g.n or h.m > g.m:
        return None
    h_nodes = sorted(h.nodes, key=lambda v: -h.degree(v))

    def adjacent_sets(a: frozenset[int], b: frozenset[int]) -> bool:
        return any(edge(x, y) in g.edges for x in a for y in b if x != y)

    def place(idx: int, used: frozenset[int], placed: dict[int, frozenset[int]]):
        if idx == len(h_nodes):
            return dict(placed)
        if g.n - len(used) < len(h_nodes) - idx:
            return None
        hv = h_nodes[idx]
        need = [hu for hu in h_nodes[:idx] if h.has_edge(hv, hu)]
        for s in _connected_subsets(g, g.nodes - used):
            if all(adjacent_sets(s, placed[hu]) for hu in need):
                placed[hv] = s
                r = place(idx + 1, used | s, placed)
                if r is not None:
                    return r
                del placed[hv]
        return None

    return place(0, frozenset(), {})


def has_minor(g: Graph, h: Graph, limit: int = 10) -> bool:
    """True iff h is obtainable from g by deletions and contractions."""
    return find_minor_embedding(g, h, limit) is not None
