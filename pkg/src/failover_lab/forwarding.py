"""Forwarding functions and patterns: tables, skipping rules, procedural rules.

A pattern answers one question: given a node, the in-port the packet arrived
on (None for origination), and the failures incident to that node, which live
out-port does the packet leave on?  Evaluation is pure; patterns never see
non-incident failures.  Ports are identified by neighbor id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .graph import EMPTY, Edge, Graph, GraphError, edge

InPort = Optional[int]  # None is the empty in-port (packet origination)
TableKey = tuple[int, frozenset[Edge], InPort]


class EvalError(Exception):
    """Base class for forwarding evaluation failures."""


class UndefinedEntry(EvalError):
    """Partial table has no entry for the queried key."""


class IsolatedNode(EvalError):
    """The node has no live incident edge to forward on."""


class Pattern:
    """Base class: a forwarding pattern for one target (and optional source)."""

    source_matching: bool = False
    source: Optional[int] = None

    def out_port(self, v: int, in_port: InPort, local: frozenset[Edge], src: Optional[int] = None) -> int:
        raise NotImplementedError

    def eval(self, v: int, in_port: InPort, local: frozenset[Edge], src: Optional[int] = None) -> int:
        """Checked evaluation: validates the src contract, then dispatches."""
        if self.source_matching:
            if src is None:
                raise EvalError("source-matching pattern evaluated without a source")
            if self.source is not None and src != self.source:
                raise EvalError(f"pattern is for source {self.source}, got {src}")
        elif src is not None and self.source is None:
            # Harmless: non-matching patterns ignore the source.
            pass
        return self.out_port(v, in_port, local, src)


@dataclass
class PatternTable(Pattern):
    """Explicit (node, local failure set, in-port) -> out-port table; may be partial."""

    entries: dict[TableKey, int] = field(default_factory=dict)
    source_matching: bool = False
    source: Optional[int] = None

    def __post_init__(self):
        for (v, local, inp), out in self.entries.items():
            self._check_entry(v, local, inp, out)

    @staticmethod
    def _check_entry(v: int, local: frozenset[Edge], inp: InPort, out: int):
        if inp is not None and edge(v, inp) in local:
            raise GraphError(f"entry at {v}: in-port {inp} is failed")
        if edge(v, out) in local:
            raise GraphError(f"entry at {v}: out-port {out} is failed")

    def set(self, v: int, local: frozenset[Edge], inp: InPort, out: int):
        self._check_entry(v, local, inp, out)
        self.entries[(v, local, inp)] = out

    def out_port(self, v, in_port, local, src=None):
        try:
            return self.entries[(v, local, in_port)]
        except KeyError:
            raise UndefinedEntry(f"no entry for node {v}, in {in_port}, local {sorted(local)}")


@dataclass(frozen=True)
class SkippingRule:
    """Per-node skipping rule: a permutation of the ports plus a start port.

    The tail of an in-port e is (perm[e], perm[perm[e]], ...); the empty
    in-port uses (start, perm[start], ...).  Forwarding picks the first tail
    element that is neither failed nor a dead port.  Dead ports mark links a
    derived pattern must never forward into (cut subdivision links); packets
    may still arrive on them.
    """

    perm: tuple[tuple[int, int], ...]  # successor pairs, sorted by port
    start: int
    dead: tuple[int, ...] = ()

    @staticmethod
    def from_cycle(
        order: list[int] | tuple[int, ...],
        start: Optional[int] = None,
        dead: tuple[int, ...] = (),
    ) -> "SkippingRule":
        succ = {order[k]: order[(k + 1) % len(order)] for k in range(len(order))}
        return SkippingRule(tuple(sorted(succ.items())), order[0] if start is None else start, tuple(sorted(dead)))

    def successor(self) -> dict[int, int]:
        return dict(self.perm)

    def ports(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.perm)

    def validate(self, neighbors: tuple[int, ...]):
        ports = self.ports()
        values = tuple(q for _, q in self.perm)
        if sorted(ports) != sorted(neighbors) or sorted(values) != sorted(neighbors):
            raise GraphError("skipping rule is not a permutation of the neighbors")
        if self.start not in ports:
            raise GraphError("skipping start is not a port")


@dataclass
class SkippingPattern(Pattern):
    """A skipping rule per node; failures are handled by skipping along tails."""

    rules: dict[int, SkippingRule]
    source_matching: bool = False
    source: Optional[int] = None

    def out_port(self, v, in_port, local, src=None):
        rule = self.rules.get(v)
        if rule is None:
            raise UndefinedEntry(f"no skipping rule at node {v}")
        succ = dict(rule.perm)
        dead = set(rule.dead)
        cur = rule.start if in_port is None else succ[in_port]
        for _ in range(len(succ)):
            if edge(v, cur) not in local and cur not in dead:
                return cur
            cur = succ[cur]
        # Every port is failed or dead.  A live dead in-port bounces in place
        # (the packet can never have reached v if the pattern is consistent).
        if in_port is not None and edge(v, in_port) not in local:
            return in_port
        raise IsolatedNode(f"node {v} has no live port on the tail")


@dataclass
class ProceduralPattern(Pattern):
    """Named rule evaluated by a callable; parameters are kept for serialization."""

    name: str
    params: dict
    fn: "callable"
    source_matching: bool = False
    source: Optional[int] = None

    def out_port(self, v, in_port, local, src=None):
        return self.fn(v, in_port, local, src)


def orbits(p: Pattern, g: Graph, v: int, local: frozenset[Edge], src: Optional[int] = None) -> list[frozenset[int]]:
    """Partition the live neighbors of v by mutual reachability under the map
    u -> eval(p, v, u, local).

    Ports on a common cycle of the functional graph form one orbit; a port on
    a tail leading into a cycle it does not belong to is its own singleton.
    """
    live = [u for u in g.neighbors(v) if edge(u, v) not in local]
    f = {u: p.eval(v, u, local, src) for u in live}
    on_cycle: set[int] = set()
    for u in live:
        seen: dict[int, int] = {}
        cur = u
        while cur not in seen:
            seen[cur] = len(seen)
            cur = f[cur]
        cycle = {x for x, k in seen.items() if k >= seen[cur]}
        on_cycle.update(cycle)
    classes: list[frozenset[int]] = []
    assigned: set[int] = set()
    for u in live:
        if u in assigned:
            continue
        if u not in on_cycle:
            classes.append(frozenset((u,)))
            assigned.add(u)
            continue
        cyc = {u}
        cur = f[u]
        while cur != u:
            cyc.add(cur)
            cur = f[cur]
        classes.append(frozenset(cyc))
        assigned |= cyc
    return sorted(classes, key=min)


def compile_to_table(p: Pattern, g: Graph) -> PatternTable:
    """Expand a pattern into a total table over every reachable key of g."""
    table = PatternTable(source_matching=p.source_matching, source=p.source)
    src = p.source if p.source_matching else None
    for v in sorted(g.nodes):
        incident = sorted(g.incident(v))
        for r in range(len(incident) + 1):
            for fail in itertools.combinations(incident, r):
                local = frozenset(fail)
                live = [u for u in g.neighbors(v) if edge(u, v) not in local]
                if not live:
                    continue
                for inp in [None, *live]:
                    out = p.eval(v, inp, local, src)
                    table.set(v, local, inp, out)
    return table
