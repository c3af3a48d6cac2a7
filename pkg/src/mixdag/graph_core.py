"""Graph types shared by the rest of the package.

Nodes are dense 0-based integer indices. Each graph optionally carries a
table of string labels used for display and serialization.

Three graph kinds are provided:

* :class:`Dag` -- directed acyclic graph.
* :class:`MixedGraph` -- directed and bidirected edges, at most one edge per pair.
* :class:`Pag` -- adjacencies with an endpoint mark (tail/arrow/circle) at each end.
"""

from __future__ import annotations

import json
from functools import cached_property
from typing import Iterable, Mapping, Sequence

TAIL = "tail"
ARROW = "arrow"
CIRCLE = "circle"
MARKS = (TAIL, ARROW, CIRCLE)


class GraphError(ValueError):
    """Invalid graph construction or query."""


class CycleError(GraphError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


def _check_node(n: int, v) -> int:
    if not isinstance(v, (int,)) and not hasattr(v, "__index__"):
        raise GraphError(f"node {v!r} is not an integer index")
    v = int(v)
    if not 0 <= v < n:
        raise GraphError(f"node {v} out of range for graph on {n} nodes")
    return v


class MixedGraph:
    """Graph with directed (u -> v) and bidirected (u <-> v) edges.

    Bidirected edges are stored as sorted pairs. Values are immutable after
    construction; ancestral/maximal status is computed on demand by
    :mod:`mixdag.separation`, never assumed.
    """

    def __init__(
        self,
        n_nodes: int,
        directed: Iterable[tuple[int, int]] = (),
        bidirected: Iterable[tuple[int, int]] = (),
        labels: Sequence[str] | None = None,
    ):
        if n_nodes < 0:
            raise GraphError("node count must be nonnegative")
        self._n = int(n_nodes)
        d = set()
        for u, v in directed:
            u, v = _check_node(self._n, u), _check_node(self._n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            d.add((u, v))
        b = set()
        for u, v in bidirected:
            u, v = _check_node(self._n, u), _check_node(self._n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            b.add((min(u, v), max(u, v)))
        pairs = set()
        for u, v in d:
            key = (min(u, v), max(u, v))
            if key in pairs:
                raise GraphError(f"more than one edge between {u} and {v}")
            pairs.add(key)
        clash = pairs & b
        if clash:
            raise GraphError(f"pair {sorted(clash)[0]} has both a directed and a bidirected edge")
        self._directed = frozenset(d)
        self._bidirected = frozenset(b)
        if labels is None:
            labels = _default_labels(self._n)
        if len(labels) != self._n:
            raise GraphError("label count does not match node count")
        self._labels = tuple(str(x) for x in labels)

    # --- basic accessors
    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def nodes(self) -> range:
        return range(self._n)

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def directed(self) -> frozenset[tuple[int, int]]:
        return self._directed

    @property
    def bidirected(self) -> frozenset[tuple[int, int]]:
        return self._bidirected

    @cached_property
    def _parents(self) -> list[frozenset[int]]:
        pa = [set() for _ in range(self._n)]
        for u, v in self._directed:
            pa[v].add(u)
        return [frozenset(p) for p in pa]

    @cached_property
    def _children(self) -> list[frozenset[int]]:
        ch = [set() for _ in range(self._n)]
        for u, v in self._directed:
            ch[u].add(v)
        return [frozenset(c) for c in ch]

    @cached_property
    def _spouses(self) -> list[frozenset[int]]:
        sp = [set() for _ in range(self._n)]
        for u, v in self._bidirected:
            sp[u].add(v)
            sp[v].add(u)
        return [frozenset(s) for s in sp]

    @cached_property
    def _marks(self) -> dict[tuple[int, int], str]:
        # (u, v) -> mark at v on the edge between u and v
        m = {}
        for u, v in self._directed:
            m[(u, v)] = ARROW
            m[(v, u)] = TAIL
        for u, v in self._bidirected:
            m[(u, v)] = ARROW
            m[(v, u)] = ARROW
        return m

    def parents(self, v: int) -> frozenset[int]:
        return self._parents[_check_node(self._n, v)]

    def children(self, v: int) -> frozenset[int]:
        return self._children[_check_node(self._n, v)]

    def spouses(self, v: int) -> frozenset[int]:
        return self._spouses[_check_node(self._n, v)]

    def neighbors(self, v: int) -> frozenset[int]:
        v = _check_node(self._n, v)
        return self._parents[v] | self._children[v] | self._spouses[v]

    def adjacent(self, u: int, v: int) -> bool:
        return (u, v) in self._marks

    def mark(self, u: int, v: int) -> str | None:
        """Mark at ``v`` on the edge between ``u`` and ``v`` (None if non-adjacent)."""
        return self._marks.get((u, v))

    def edges(self) -> list[tuple[int, int, str, str]]:
        """All edges as ``(u, v, mark_at_u, mark_at_v)`` with ``u < v``."""
        out = []
        for (u, v), mv in self._marks.items():
            if u < v:
                out.append((u, v, self._marks[(v, u)], mv))
        return sorted(out)

    def ancestors(self, v) -> frozenset[int]:
        """Nodes with a directed path into ``v`` (or into any node of a set); includes the node(s)."""
        return ancestors(self, v)

    def descendants(self, v) -> frozenset[int]:
        return descendants(self, v)

    def has_directed_cycle(self) -> bool:
        return _find_cycle(self._n, self._children) is not None

    def to_dict(self) -> dict:
        return {
            "nodes": list(self._labels),
            "directed": [list(e) for e in sorted(self._directed)],
            "bidirected": [list(e) for e in sorted(self._bidirected)],
        }

    def with_labels(self, labels: Sequence[str]) -> "MixedGraph":
        return type(self)._rebuild(self, labels)

    @classmethod
    def _rebuild(cls, g, labels):
        return MixedGraph(g.n_nodes, g.directed, g.bidirected, labels)

    def _key(self):
        return (self._n, self._directed, self._bidirected)

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        parts = [f"{self._labels[u]}->{self._labels[v]}" for u, v in sorted(self._directed)]
        parts += [f"{self._labels[u]}<->{self._labels[v]}" for u, v in sorted(self._bidirected)]
        return f"{type(self).__name__}(n={self._n}, {{{', '.join(parts)}}})"


class Dag(MixedGraph):
    """Directed acyclic graph; construction rejects directed cycles."""

    def __init__(
        self,
        n_nodes: int,
        edges: Iterable[tuple[int, int]] = (),
        labels: Sequence[str] | None = None,
    ):
        super().__init__(n_nodes, edges, (), labels)
        cycle = _find_cycle(self._n, self._children)
        if cycle is not None:
            raise CycleError(cycle)

    @property
    def edges_set(self) -> frozenset[tuple[int, int]]:
        return self._directed

    @classmethod
    def _rebuild(cls, g, labels):
        return Dag(g.n_nodes, g.directed, labels)

    def topological_order(self) -> list[int]:
        return topological_order(self)

    def to_mixed(self) -> MixedGraph:
        return MixedGraph(self._n, self._directed, (), self._labels)


class Pag:
    """Partial ancestral graph.

    ``marks`` maps each adjacent pair ``(u, v)`` with ``u < v`` to
    ``(mark_at_u, mark_at_v)``, each mark one of ``"tail"``, ``"arrow"``,
    ``"circle"``.
    """

    def __init__(
        self,
        n_nodes: int,
        marks: Mapping[tuple[int, int], tuple[str, str]] | None = None,
        labels: Sequence[str] | None = None,
    ):
        self._n = int(n_nodes)
        m = {}
        for (u, v), (mu, mv) in (marks or {}).items():
            u, v = _check_node(self._n, u), _check_node(self._n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if mu not in MARKS or mv not in MARKS:
                raise GraphError(f"invalid marks {(mu, mv)!r}")
            if u > v:
                u, v, mu, mv = v, u, mv, mu
            if (u, v) in m:
                raise GraphError(f"duplicate adjacency {(u, v)}")
            m[(u, v)] = (mu, mv)
        self._edges = dict(sorted(m.items()))
        if labels is None:
            labels = _default_labels(self._n)
        if len(labels) != self._n:
            raise GraphError("label count does not match node count")
        self._labels = tuple(str(x) for x in labels)

    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def marks(self) -> dict[tuple[int, int], tuple[str, str]]:
        return dict(self._edges)

    def adjacencies(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._edges)

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edges

    def mark(self, u: int, v: int) -> str | None:
        """Mark at ``v`` on the edge between ``u`` and ``v``."""
        if u < v:
            e = self._edges.get((u, v))
            return None if e is None else e[1]
        e = self._edges.get((v, u))
        return None if e is None else e[0]

    def to_dict(self) -> dict:
        return {
            "nodes": list(self._labels),
            "directed": [],
            "bidirected": [],
            "marks": {f"{u}-{v}": [mu, mv] for (u, v), (mu, mv) in self._edges.items()},
        }

    def __eq__(self, other):
        if not isinstance(other, Pag):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self):
        return hash((self._n, tuple(self._edges.items())))

    def __repr__(self):
        sym = {TAIL: "-", ARROW: ">", CIRCLE: "o"}
        left = {TAIL: "-", ARROW: "<", CIRCLE: "o"}
        parts = [
            f"{self._labels[u]} {left[mu]}-{sym[mv]} {self._labels[v]}"
            for (u, v), (mu, mv) in self._edges.items()
        ]
        return f"Pag(n={self._n}, {{{', '.join(parts)}}})"

    @classmethod
    def from_mag(cls, g: MixedGraph) -> "Pag":
        """The PAG whose marks are exactly those of ``g`` (no circles)."""
        return cls(g.n_nodes, {(u, v): (mu, mv) for u, v, mu, mv in g.edges()}, g.labels)


# --- elementary queries


def _as_node_set(g, v) -> set[int]:
    if isinstance(v, Iterable) and not isinstance(v, (str, bytes)):
        return {_check_node(g.n_nodes, x) for x in v}
    return {_check_node(g.n_nodes, v)}


def ancestors(g: MixedGraph, v) -> frozenset[int]:
    """Nodes ``u`` with a directed path ``u -> ... -> v``; ``v`` itself included.

    ``v`` may be a single node or a set of nodes.
    """
    seen = _as_node_set(g, v)
    stack = list(seen)
    pa = g._parents
    while stack:
        w = stack.pop()
        for p in pa[w]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def descendants(g: MixedGraph, v) -> frozenset[int]:
    seen = _as_node_set(g, v)
    stack = list(seen)
    ch = g._children
    while stack:
        w = stack.pop()
        for c in ch[w]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def _find_cycle(n, children) -> list[int] | None:
    color = [0] * n
    parent = [-1] * n
    for s in range(n):
        if color[s]:
            continue
        stack = [(s, iter(sorted(children[s])))]
        color[s] = 1
        while stack:
            u, it = stack[-1]
            for w in it:
                if color[w] == 0:
                    color[w] = 1
                    parent[w] = u
                    stack.append((w, iter(sorted(children[w]))))
                    break
                if color[w] == 1:
                    cyc = [w]
                    x = u
                    while x != w:
                        cyc.append(x)
                        x = parent[x]
                    cyc.append(w)
                    return cyc[::-1]
            else:
                color[u] = 2
                stack.pop()
    return None


def topological_order(g: MixedGraph) -> list[int]:
    """Kahn's algorithm with smallest-index tie-break."""
    import heapq

    indeg = [len(g._parents[v]) for v in range(g.n_nodes)]
    heap = [v for v in range(g.n_nodes) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for c in g._children[u]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != g.n_nodes:
        raise CycleError(_find_cycle(g.n_nodes, g._children) or [])
    return order


def induced_subgraph(g, nodes: Iterable[int]):
    """Subgraph on ``nodes``, relabeled to dense indices.

    New index ``i`` corresponds to ``sorted(nodes)[i]``; labels travel with
    the nodes. Works for :class:`Dag`, :class:`MixedGraph` and :class:`Pag`.
    """
    keep = sorted({_check_node(g.n_nodes, v) for v in nodes})
    index = {v: i for i, v in enumerate(keep)}
    labels = [g.labels[v] for v in keep]
    if isinstance(g, Pag):
        marks = {
            (index[u], index[v]): mm
            for (u, v), mm in g.marks.items()
            if u in index and v in index
        }
        return Pag(len(keep), marks, labels)
    directed = [(index[u], index[v]) for u, v in g.directed if u in index and v in index]
    if isinstance(g, Dag):
        return Dag(len(keep), directed, labels)
    bidirected = [(index[u], index[v]) for u, v in g.bidirected if u in index and v in index]
    return MixedGraph(len(keep), directed, bidirected, labels)


# --- JSON graph format


def graph_to_json(g, **kw) -> str:
    return json.dumps(g.to_dict(), **kw)


def graph_from_dict(d: Mapping):
    """Build a graph from the JSON-ready dict form.

    A dict with ``"marks"`` becomes a :class:`Pag`; one with bidirected edges a
    :class:`MixedGraph`; otherwise a :class:`Dag`.
    """
    labels = list(d["nodes"])
    n = len(labels)
    if "marks" in d:
        marks = {}
        for key, (mu, mv) in d["marks"].items():
            u, v = key.split("-")
            marks[(int(u), int(v))] = (mu, mv)
        return Pag(n, marks, labels)
    directed = [tuple(e) for e in d.get("directed", [])]
    bidirected = [tuple(e) for e in d.get("bidirected", [])]
    if bidirected:
        return MixedGraph(n, directed, bidirected, labels)
    try:
        return Dag(n, directed, labels)
    except CycleError:
        return MixedGraph(n, directed, (), labels)


def graph_from_json(text: str):
    return graph_from_dict(json.loads(text))
