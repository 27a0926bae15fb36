"""Counterexample gadgets with their adversarial failure families.

Each constructor documents its node-id layout and ships named failure
families transcribed from the impossibility arguments, closed over the
symmetry choices those arguments make "w.l.o.g.".  A family refutes every
complete forwarding pattern by simulation alone, so the synthesizer reaches
Unsat on it without relying on pruning.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graph import Edge, Graph, edge
from .resilience import Family


@dataclass(frozen=True)
class GadgetSpec:
    name: str
    params: tuple[tuple[str, int], ...]
    legend: str
    expected_nodes: int
    expected_edges: int


@dataclass(frozen=True)
class Gadget:
    spec: GadgetSpec
    graph: Graph
    families: dict[str, Family] = field(default_factory=dict)

    def __post_init__(self):
        assert self.graph.n == self.spec.expected_nodes
        assert self.graph.m == self.spec.expected_edges

    def family(self, name: str) -> Family:
        return self.families[name]


def _dedup(sets: list[frozenset[Edge]]) -> list[frozenset[Edge]]:
    seen = set()
    out = []
    for s in sets:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# K5
# ---------------------------------------------------------------------------


def k5() -> Gadget:
    """Complete graph on five nodes.  Layout: 0..3 non-targets, 4 = target;
    node 0 is the designated packet origin of the impossibility argument.
    """
    g = Graph(5, itertools.combinations(range(5), 2), target=4, source=0)
    e_all = g.edges
    others = (1, 2, 3)
    sets: list[frozenset[Edge]] = [frozenset(), frozenset({(0, 4)})]
    # Force the map at node 0 (local view: (0,4) failed) to cycle over 1,2,3:
    # leave only 0's other links plus one direct link to the target alive.
    for x in others:
        sets.append(e_all - {edge(0, 1), edge(0, 2), edge(0, 3), edge(x, 4)})
    for a, b in itertools.permutations(others, 2):
        c = next(y for y in others if y not in (a, b))
        # Degree-2 relay forcings at a and b, then the locally
        # indistinguishable loop set (0 sees only (0,4) failed).
        sets.append(e_all - {edge(0, a), edge(a, b), edge(b, 4)})
        sets.append(e_all - {edge(0, b), edge(a, b), edge(0, 4)})
        sets.append(frozenset({edge(0, 4), edge(a, 4), edge(b, 4), edge(a, c), edge(b, c)}))
    fam = Family.explicit(_dedup(sets), name="nok5")
    lemma = Family.explicit(
        [frozenset({(0, 4), (1, 4), (2, 4), (1, 3), (2, 3)})], name="nok5-lemma"
    )
    spec = GadgetSpec("k5", (), "0..3 plain, 4 target, 0 origin", 5, 10)
    return Gadget(spec, g, {"nok5": fam, "nok5-lemma": lemma})


# ---------------------------------------------------------------------------
# K3,3
# ---------------------------------------------------------------------------


def k33() -> Gadget:
    """Complete bipartite 3+3.  Layout: part one = {0 (=a, start), 1 (=b),
    2 (=target)}, part two = {3, 4, 5}.
    """
    part1, part2 = (0, 1, 2), (3, 4, 5)
    g = Graph(6, [(u, v) for u in part1 for v in part2], target=2, source=0)
    e_all = g.edges
    sets: list[frozenset[Edge]] = [frozenset()]
    # Cyclic forcing at node 0 (failure-free local view).
    for x in part2:
        sets.append(e_all - {edge(0, 3), edge(0, 4), edge(0, 5), edge(x, 2)})
    for x, y in itertools.permutations(part2, 2):
        z = next(w for w in part2 if w not in (x, y))
        # Relay forcings at x and y, then the loop set: 0's view stays empty.
        sets.append(e_all - {edge(0, x), edge(1, x), edge(1, y), edge(y, 2)})
        sets.append(e_all - {edge(0, y), edge(1, y), edge(0, x), edge(x, 2)})
        sets.append(frozenset({edge(2, x), edge(2, y), edge(1, z)}))
    fam = Family.explicit(_dedup(sets), name="nok3")
    lemma = Family.explicit([frozenset(), frozenset({(2, 3), (2, 4), (1, 5)})], name="nok3-lemma")
    spec = GadgetSpec("k33", (), "part1 = {0 start, 1, 2 target}, part2 = {3,4,5}", 6, 9)
    return Gadget(spec, g, {"nok3": fam, "nok3-lemma": lemma})


# ---------------------------------------------------------------------------
# The 13-node source/target/in-port gadget and its variants
# ---------------------------------------------------------------------------

LEVEL1 = (0, 1, 2, 3)
CENTER = 4
PAIR_ID = {
    frozenset((0, 1)): 5,
    frozenset((0, 2)): 6,
    frozenset((0, 3)): 7,
    frozenset((1, 2)): 8,
    frozenset((1, 3)): 9,
    frozenset((2, 3)): 10,
}
TARGET13 = 11
SOURCE13 = 12


def _pair(i: int, j: int) -> int:
    return PAIR_ID[frozenset((i, j))]


def _gadget13_edges(source: int) -> list[tuple[int, int]]:
    edges = [(i, CENTER) for i in LEVEL1]
    for pair, pid in PAIR_ID.items():
        i, j = sorted(pair)
        edges += [(i, pid), (j, pid), (pid, TARGET13)]
    edges += [(source, i) for i in LEVEL1]
    return edges


def _loop_sets(source: int) -> list[frozenset[Edge]]:
    """One trapping set per (center-cycle, entry) choice.

    For the cycle a4 -> a1 -> a2 -> a3 -> a4 on level-one nodes, fail every
    source link except (source, a4), every pair link of a1/a3 except the ones
    to their shared pair node, all pair links of a4, and the shared pair
    node's target link.  a2 keeps its pair links so the target stays
    connected; the packet never gets there.
    """
    sets = []
    for a4, a1, a3 in itertools.permutations(LEVEL1, 3):
        (a2,) = set(LEVEL1) - {a1, a3, a4}
        p13 = _pair(a1, a3)
        failed = {edge(source, x) for x in (a1, a2, a3)}
        for x in (a1, a3):
            failed |= {edge(x, _pair(x, y)) for y in LEVEL1 if y != x and _pair(x, y) != p13}
        failed |= {edge(a4, _pair(a4, y)) for y in LEVEL1 if y != a4}
        failed.add(edge(p13, TARGET13))
        sets.append(frozenset(failed))
    return _dedup(sets)


def feigenbaum13() -> Gadget:
    """The 13-node gadget refuting source/target/in-port matching.

    Layout: level one 0..3, center 4, pair nodes 5..10 (5=01, 6=02, 7=03,
    8=12, 9=13, 10=23), target 11, source 12.  The textual construction has
    26 links; the replication argument's stated m0 = 22 matches it without
    the four source links (both counts kept in the spec record).
    """
    g = Graph(13, _gadget13_edges(SOURCE13), target=TARGET13, source=SOURCE13)
    fam = Family.explicit([frozenset(), *_loop_sets(SOURCE13)], name="feigenbaum-loops")
    spec = GadgetSpec(
        "feigenbaum13",
        (),
        "level1 0..3, center 4, pairs 5..10, target 11, source 12",
        13,
        26,
    )
    return Gadget(spec, g, {"feigenbaum-loops": fam})


def padded_gk(k: int) -> Gadget:
    """feigenbaum13 with the source stretched into a path s0..sk.

    s0 = 12 stays the designated source; path nodes continue 13, 14, ...;
    the far end sk attaches to level one.  k = 0 is the plain gadget.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    sk = SOURCE13 + k
    edges = _gadget13_edges(sk)
    edges += [(SOURCE13 + i, SOURCE13 + i + 1) for i in range(k)]
    g = Graph(13 + k, edges, target=TARGET13, source=SOURCE13)
    fam = Family.explicit([frozenset(), *_loop_sets(sk)], name="feigenbaum-loops")
    spec = GadgetSpec(
        "padded",
        (("k", k),),
        f"gadget ids as feigenbaum13, source path 12..{sk}, level-one links at {sk}",
        13 + k,
        26 + k,
    )
    return Gadget(spec, g, {"feigenbaum-loops": fam})


def replicated(r_copies: int, g_pad: int = 0) -> Gadget:
    """r padded gadgets sharing one source, with a fresh global target.

    Layout: 0 = shared source; copy c occupies base..base+11+g_pad with
    base = 1 + c*(12+g_pad) (level one +0..3, center +4, pairs +5..10, old
    target +11, path tail +12..); the global target is the last id.
    The joint family composes one per-copy trapping set for every copy.
    """
    if r_copies < 1:
        raise ValueError("need at least one copy")
    shared = 0
    span = 12 + g_pad
    nodes = 1 + r_copies * span + 1
    gt = nodes - 1
    edges: list[tuple[int, int]] = []
    copy_loopsets: list[list[frozenset[Edge]]] = []

    for c in range(r_copies):
        base = 1 + c * span

        def m(v: int, base=base) -> int:
            # gadget-local ids 0..11 shift by base-0? map: 0..11 -> base+0..base+11,
            # 12 (s0) -> shared, 13.. (path) -> base+12..
            if v == SOURCE13:
                return shared
            if v < SOURCE13:
                return base + v
            return base + v - 1

        sk_local = SOURCE13 + g_pad
        for u, v in _gadget13_edges(sk_local):
            edges.append((m(u), m(v)))
        for i in range(g_pad):
            edges.append((m(SOURCE13 + i), m(SOURCE13 + i + 1)))
        edges.append((m(TARGET13), gt))
        copy_loopsets.append(
            [frozenset(edge(m(u), m(v)) for u, v in s) for s in _loop_sets(sk_local)]
        )

    g = Graph(nodes, edges, target=gt, source=shared)
    joint = [
        frozenset().union(*combo) for combo in itertools.product(*copy_loopsets)
    ]
    fam = Family.explicit([frozenset(), *_dedup(joint)], name="joint-loops")
    spec = GadgetSpec(
        "replicated",
        (("r", r_copies), ("pad", g_pad)),
        f"0 shared source, copies of span {span} from 1, global target {gt}",
        nodes,
        r_copies * (26 + g_pad + 1),
    )
    return Gadget(spec, g, {"joint-loops": fam})


# ---------------------------------------------------------------------------
# Illustrative figures
# ---------------------------------------------------------------------------


def planar7_witness() -> Gadget:
    """Cached result of the seven-node planar sweep (derived, not transcribed).

    This planar graph admits no perfectly resilient pattern for target 0:
    bounded-failure synthesis (|F| <= 4) exhausts with a replayable
    certificate.  Re-derivable via sweep.sweep over the connected planar
    7-node candidates; cached here so downstream runs are instant.
    """
    edges = [
        (0, 1), (0, 2), (0, 3), (0, 4), (0, 6),
        (1, 2), (1, 4), (2, 3), (2, 5), (3, 4), (3, 6), (4, 5),
    ]
    g = Graph(7, edges, target=0)
    spec = GadgetSpec("planar7", (), "derived by sweep; target 0", 7, 12)
    return Gadget(spec, g, {})


def relevance_fig() -> Gadget:
    """The relevance illustration: i = 0 adjacent to v1..v3 = 1..3 and s = 4;
    v2, v3 reach the target t = 5 directly, v1 only through v2/v3.
    """
    edges = [(0, 1), (0, 2), (0, 3), (5, 2), (5, 3), (1, 3), (1, 2), (0, 4)]
    g = Graph(6, edges, target=5, source=4)
    spec = GadgetSpec("relevance-fig", (), "i=0, v1..v3=1..3, s=4, t=5", 6, 8)
    return Gadget(spec, g, {})


def counter_fig() -> Gadget:
    """Path t-x-u-v-w with chords (t,v) and (u,w): bouncing at v is fine.

    Layout: t=0, x=1, u=2, v=3, w=4.  Family "counter" fails the (t,v) chord.
    """
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 3), (2, 4)]
    g = Graph(5, edges, target=0)
    fam = Family.explicit([frozenset({(0, 3)})], name="counter")
    spec = GadgetSpec("counter-fig", (), "t=0, x=1, u=2, v=3, w=4", 5, 6)
    return Gadget(spec, g, {"counter": fam})


GADGETS = {
    "k5": k5,
    "k33": k33,
    "feigenbaum13": feigenbaum13,
    "padded": padded_gk,
    "replicated": replicated,
    "planar7": planar7_witness,
    "relevance-fig": relevance_fig,
    "counter-fig": counter_fig,
}
