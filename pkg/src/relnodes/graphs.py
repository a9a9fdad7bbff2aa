"""Graph structures and the graph-based route to the relevant set.

The minimal undirected independence map of a strictly positive
distribution can be built two ways: edge exclusion (test every pair
given everything else) or Markov boundaries found with IAMB.  Either way,
the relevant nodes are the non-targets sharing a connected component with
some target.
"""

from __future__ import annotations

import json
import logging
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .citests import IndependenceTester
from .domain import Domain, check_disjoint

log = logging.getLogger(__name__)

_BARE_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class UndirectedGraph:
    domain: Domain
    edges: frozenset
    # pairs where Markov-boundary membership disagreed (data testers only)
    flagged: tuple = ()

    def __post_init__(self):
        edges = frozenset(_edge(int(a), int(b)) for a, b in self.edges)
        n = len(self.domain)
        for a, b in edges:
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge {(a, b)} outside the domain")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_names(cls, domain: Domain, pairs: Iterable[tuple[str, str]]) -> "UndirectedGraph":
        return cls(domain, frozenset(_edge(domain.index(a), domain.index(b)) for a, b in pairs))

    def neighbors(self, node: int) -> tuple[int, ...]:
        return tuple(sorted({b if a == node else a for a, b in self.edges if node in (a, b)}))

    def adjacency(self) -> np.ndarray:
        n = len(self.domain)
        adj = np.zeros((n, n), dtype=bool)
        for a, b in self.edges:
            adj[a, b] = adj[b, a] = True
        return adj

    def edge_names(self) -> list[tuple[str, str]]:
        names = self.domain.names
        return [(names[a], names[b]) for a, b in sorted(self.edges)]

    def to_dot(self, name: str = "G") -> str:
        def q(s: str) -> str:
            return s if _BARE_ID.match(s) else json.dumps(s)

        lines = [f"graph {q(name)} {{"]
        lines += [f"  {q(v)};" for v in self.domain.names]
        lines += [f"  {q(a)} -- {q(b)};" for a, b in self.edge_names()]
        lines.append("}")
        return "\n".join(lines) + "\n"


class Dag:
    """Directed acyclic graph stored as one sorted parent tuple per node."""

    def __init__(self, domain, parents: Iterable[Iterable[int]]):
        self.domain = domain if isinstance(domain, Domain) else Domain(domain)
        self.parents = tuple(tuple(sorted(set(int(p) for p in ps))) for ps in parents)
        n = len(self.domain)
        if len(self.parents) != n:
            raise ValueError("need one parent set per node")
        for v, ps in enumerate(self.parents):
            if any(not 0 <= p < n or p == v for p in ps):
                raise ValueError(f"bad parent set for {self.domain.names[v]}")
        self.children = tuple(
            tuple(c for c in range(n) if v in self.parents[c]) for v in range(n)
        )
        self._order = self._topological_order()

    @classmethod
    def from_edges(cls, domain, edges: Iterable[tuple]) -> "Dag":
        domain = domain if isinstance(domain, Domain) else Domain(domain)
        parents: list[set[int]] = [set() for _ in domain.names]
        for p, c in edges:
            parents[domain.index(c)].add(domain.index(p))
        return cls(domain, parents)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dag) and self.domain == other.domain and self.parents == other.parents

    def __repr__(self) -> str:
        return f"Dag({self.edge_names()!r})"

    def _topological_order(self) -> tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        ready = deque(v for v, d in enumerate(indeg) if d == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for c in self.children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.parents):
            raise ValueError("graph has a directed cycle")
        return tuple(order)

    def topological_order(self) -> tuple[int, ...]:
        return self._order

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, c) for c, ps in enumerate(self.parents) for p in ps]

    def edge_names(self) -> list[tuple[str, str]]:
        names = self.domain.names
        return [(names[p], names[c]) for p, c in self.edges]

    def ancestors(self, nodes: Iterable[int]) -> set[int]:
        """``nodes`` together with all their ancestors."""
        seen = set(nodes)
        stack = list(seen)
        while stack:
            for p in self.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def moral_graph(self) -> UndirectedGraph:
        edges = set()
        for c, ps in enumerate(self.parents):
            edges.update(_edge(p, c) for p in ps)
            edges.update(_edge(a, b) for i, a in enumerate(ps) for b in ps[i + 1:])
        return UndirectedGraph(self.domain, frozenset(edges))


def d_separated(dag: Dag, xs, ys, zs=()) -> bool:
    """Whether ``zs`` d-separates ``xs`` from ``ys`` in ``dag``.

    Reachability over (node, direction) states: a trail may pass a
    non-collider only if it is unobserved, and a collider only if it or
    one of its descendants is observed.
    """
    xs, ys, zs = dag.domain.varset(xs), dag.domain.varset(ys), dag.domain.varset(zs)
    check_disjoint(xs, ys, zs)
    observed = set(zs)
    targets = set(ys)
    opens_collider = dag.ancestors(observed)
    # "up": entered from a child; "down": entered from a parent
    queue = deque((x, "up") for x in xs)
    seen = set()
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        node, direction = state
        if node in targets:
            return False
        if direction == "up" and node not in observed:
            queue.extend((p, "up") for p in dag.parents[node])
            queue.extend((c, "down") for c in dag.children[node])
        elif direction == "down":
            if node not in observed:
                queue.extend((c, "down") for c in dag.children[node])
            if node in opens_collider:
                queue.extend((p, "up") for p in dag.parents[node])
    return True


def ug_edge_exclusion(tester: IndependenceTester) -> UndirectedGraph:
    """X -- Y iff X and Y are dependent given all remaining variables."""
    n = len(tester.domain)
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            rest = tuple(v for v in range(n) if v not in (a, b))
            if not tester.independent(a, b, rest):
                edges.add((a, b))
    return UndirectedGraph(tester.domain, frozenset(edges))


@dataclass(frozen=True)
class MarkovBoundary:
    node: int
    boundary: tuple[int, ...]
    max_conditioning: int = 0


def markov_boundary_iamb(tester: IndependenceTester, node) -> MarkovBoundary:
    """Incremental association Markov boundary search.

    Grow: add the candidate most associated with ``node`` given the current
    boundary, as long as it tests dependent.  Shrink: drop members that are
    independent of ``node`` given the other members.
    """
    node = tester.domain.index(node)
    n = len(tester.domain)
    mb: list[int] = []
    largest = 0
    while True:
        best, best_score, best_dep = None, -1.0, False
        for cand in range(n):
            if cand == node or cand in mb:
                continue
            dec = tester.decide(node, cand, mb)
            largest = max(largest, dec.conditioning_size)
            score = abs(dec.statistic)
            if score > best_score:
                best, best_score, best_dep = cand, score, not dec.independent
        if best is None or not best_dep:
            break
        mb.append(best)
    for member in sorted(mb):
        rest = [v for v in mb if v != member]
        dec = tester.decide(node, member, rest)
        largest = max(largest, dec.conditioning_size)
        if dec.independent:
            mb = rest
    return MarkovBoundary(node, tuple(sorted(mb)), largest)


def ug_via_markov_boundaries(tester: IndependenceTester) -> UndirectedGraph:
    """X -- Y iff each lies in the other's Markov boundary.

    Pairs where only one direction holds are left out and recorded in
    :attr:`UndirectedGraph.flagged`.
    """
    n = len(tester.domain)
    boundaries = [set(markov_boundary_iamb(tester, v).boundary) for v in range(n)]
    edges, flagged = set(), []
    for a in range(n):
        for b in range(a + 1, n):
            ab, ba = b in boundaries[a], a in boundaries[b]
            if ab and ba:
                edges.add((a, b))
            elif ab or ba:
                flagged.append((a, b))
    if flagged:
        names = tester.domain.names
        log.warning("asymmetric Markov boundary membership: %s",
                    ", ".join(f"{names[a]}/{names[b]}" for a, b in flagged))
    return UndirectedGraph(tester.domain, frozenset(edges), tuple(flagged))


def relevant_via_ug(g: UndirectedGraph, targets) -> tuple[int, ...]:
    """Non-target nodes in a connected component that contains a target."""
    t = g.domain.varset(targets)
    adj = {v: [] for v in range(len(g.domain))}
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set(t)
    queue = deque(t)
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return tuple(sorted(seen - set(t)))
