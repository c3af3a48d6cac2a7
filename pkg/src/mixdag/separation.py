"""d-separation, m-separation, inducing paths and MAG checks.

Separation queries run a reachability search over ``(node, arrived with an
arrowhead)`` states, which is linear in the graph size. A slow simple-path
enumerator is kept alongside as an independent reference.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .graph_core import ARROW, Dag, GraphError, MixedGraph, ancestors


@dataclass(frozen=True)
class SeparationQuery:
    """Disjoint node sets ``A``, ``B`` (nonempty) and conditioning set ``C``."""

    set_a: frozenset[int]
    set_b: frozenset[int]
    set_c: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "set_a", frozenset(self.set_a))
        object.__setattr__(self, "set_b", frozenset(self.set_b))
        object.__setattr__(self, "set_c", frozenset(self.set_c))
        if not self.set_a or not self.set_b:
            raise GraphError("separation query needs nonempty A and B")
        if self.set_a & self.set_b or self.set_a & self.set_c or self.set_b & self.set_c:
            raise GraphError("separation query sets must be pairwise disjoint")

    def validate(self, g: MixedGraph) -> None:
        for v in self.set_a | self.set_b | self.set_c:
            if not 0 <= v < g.n_nodes:
                raise GraphError(f"node {v} out of range for graph on {g.n_nodes} nodes")


def _as_set(x) -> frozenset[int]:
    if isinstance(x, Iterable) and not isinstance(x, (str, bytes)):
        return frozenset(int(v) for v in x)
    return frozenset([int(x)])


def _query(a, b, c) -> SeparationQuery:
    if isinstance(a, SeparationQuery):
        return a
    return SeparationQuery(_as_set(a), _as_set(b), _as_set(c if c is not None else ()))


def m_connected_nodes(g: MixedGraph, sources: Iterable[int], cond: Iterable[int]) -> frozenset[int]:
    """Every node reachable from ``sources`` by an m-connecting walk given ``cond``.

    A node entered with an arrowhead and left through an arrowhead at it is a
    collider; colliders pass iff they are ancestors of ``cond``, non-colliders
    iff they are outside ``cond``.
    """
    cond = frozenset(cond)
    an_c = ancestors(g, cond) if cond else frozenset()
    marks = g._marks
    nbrs = [g.neighbors(v) for v in g.nodes]
    seen = set()
    queue = deque()
    for s in sources:
        # a source behaves like a non-collider it leaves freely
        for w in nbrs[s]:
            st = (w, marks[(s, w)] == ARROW)
            if st not in seen:
                seen.add(st)
                queue.append(st)
    while queue:
        v, head = queue.popleft()
        for w in nbrs[v]:
            collider = head and marks[(w, v)] == ARROW
            if collider:
                if v not in an_c:
                    continue
            elif v in cond:
                continue
            st = (w, marks[(v, w)] == ARROW)
            if st not in seen:
                seen.add(st)
                queue.append(st)
    return frozenset(v for v, _ in seen if v not in cond)


def m_separated(g: MixedGraph, a, b=None, c=None) -> bool:
    """True iff every path between ``a`` and ``b`` is blocked given ``c``.

    Accepts either a :class:`SeparationQuery` or three node sets (single nodes
    are promoted to singleton sets).
    """
    q = _query(a, b, c)
    q.validate(g)
    reach = m_connected_nodes(g, q.set_a, q.set_c)
    return not (reach & q.set_b)


def d_separated(g: Dag, a, b=None, c=None) -> bool:
    """d-separation in a DAG (m-separation with no bidirected edges)."""
    if g.bidirected:
        raise GraphError("d_separated expects a DAG; use m_separated for mixed graphs")
    return m_separated(g, a, b, c)


# --- reference path enumeration


def simple_paths(g: MixedGraph, a: int, b: int) -> Iterator[list[int]]:
    """All simple paths from ``a`` to ``b`` (exponential; tests only)."""
    stack = [(a, [a])]
    while stack:
        v, path = stack.pop()
        for w in sorted(g.neighbors(v), reverse=True):
            if w in path:
                continue
            if w == b:
                yield path + [w]
            else:
                stack.append((w, path + [w]))


def path_is_open(g: MixedGraph, path: list[int], cond: frozenset[int]) -> bool:
    an_c = ancestors(g, cond) if cond else frozenset()
    for i in range(1, len(path) - 1):
        u, v, w = path[i - 1], path[i], path[i + 1]
        collider = g.mark(u, v) == ARROW and g.mark(w, v) == ARROW
        if collider and v not in an_c:
            return False
        if not collider and v in cond:
            return False
    return True


def m_separated_by_paths(g: MixedGraph, a, b, c=()) -> bool:
    """Path-enumeration reference for :func:`m_separated`."""
    q = _query(a, b, c)
    for x in q.set_a:
        for y in q.set_b:
            for p in simple_paths(g, x, y):
                if path_is_open(g, p, q.set_c):
                    return False
    return True


# --- ancestral / maximal


def is_ancestral(g: MixedGraph) -> bool:
    """No directed cycle, and no bidirected edge between a node and its ancestor."""
    if g.has_directed_cycle():
        return False
    for u, v in g.bidirected:
        if u in ancestors(g, v) or v in ancestors(g, u):
            return False
    return True


def _require_ancestral(g: MixedGraph) -> None:
    if not is_ancestral(g):
        raise GraphError("graph is not ancestral")


def find_inducing_path(g: MixedGraph) -> list[int] | None:
    """Some inducing path ``v1, ..., vn`` of an ancestral graph, or None.

    ``v1`` and ``vn`` are non-adjacent, every interior node is a collider on
    the path (so edges between interior nodes are bidirected) and an ancestor
    of ``v1`` or ``vn``.
    """
    _require_ancestral(g)
    marks = g._marks
    for v1, vn in itertools.combinations(g.nodes, 2):
        if g.adjacent(v1, vn):
            continue
        allowed = ancestors(g, {v1, vn}) - {v1, vn}
        prev = {}
        queue = deque()
        for m in sorted(g.neighbors(v1)):
            if m in allowed and marks[(v1, m)] == ARROW:
                prev[m] = v1
                queue.append(m)
        while queue:
            m = queue.popleft()
            if marks.get((vn, m)) == ARROW:
                path = [vn, m]
                while path[-1] != v1:
                    path.append(prev[path[-1]])
                return path[::-1]
            for w in sorted(g.spouses(m)):
                if w in allowed and w not in prev:
                    prev[w] = m
                    queue.append(w)
    return None


def is_maximal(g: MixedGraph) -> bool:
    """An ancestral graph is maximal iff it has no inducing path."""
    return find_inducing_path(g) is None


def separable(g: MixedGraph, u: int, v: int) -> frozenset[int] | None:
    """Smallest-first search for a set ``C`` separating ``u`` and ``v``; None if none exists."""
    rest = [w for w in g.nodes if w not in (u, v)]
    for k in range(len(rest) + 1):
        for c in itertools.combinations(rest, k):
            if m_separated(g, {u}, {v}, c):
                return frozenset(c)
    return None


def is_maximal_brute_force(g: MixedGraph) -> bool:
    """Definitional check: every non-adjacent pair is separated by some subset."""
    _require_ancestral(g)
    for u, v in itertools.combinations(g.nodes, 2):
        if not g.adjacent(u, v) and separable(g, u, v) is None:
            return False
    return True


def is_mag(g: MixedGraph) -> bool:
    return is_ancestral(g) and is_maximal(g)
