"""Mixture DAGs, component MAGs, poset compatibility and the union graph.

Node ``v`` of component ``j`` in a mixture DAG is index ``j * |V| + v``; the
mixing root ``y`` is the last index ``K * |V|``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph_core import ARROW, Dag, GraphError, MixedGraph, Pag, graph_from_dict, induced_subgraph
from .marginal import marginalize_root


@dataclass(frozen=True)
class MixtureSpec:
    """K component DAGs over a shared node set, the invariant nodes and mixing weights."""

    components: tuple[Dag, ...]
    v_inv: frozenset[int]
    mixing_weights: tuple[float, ...] = ()

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GraphError("a mixture needs at least one component")
        n = comps[0].n_nodes
        for g in comps:
            if g.n_nodes != n:
                raise GraphError("components must share the node count")
            if g.labels != comps[0].labels:
                raise GraphError("components must share node labels")
        w = tuple(float(x) for x in self.mixing_weights) or (1.0 / len(comps),) * len(comps)
        if len(w) != len(comps):
            raise GraphError("one mixing weight per component required")
        if any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
            raise GraphError("mixing weights must be nonnegative and sum to 1")
        v_inv = frozenset(int(v) for v in self.v_inv)
        if any(not 0 <= v < n for v in v_inv):
            raise GraphError("invariant nodes out of range")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "v_inv", v_inv)
        object.__setattr__(self, "mixing_weights", w)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def n_nodes(self) -> int:
        return self.components[0].n_nodes

    @property
    def labels(self) -> tuple[str, ...]:
        return self.components[0].labels

    @property
    def varying(self) -> frozenset[int]:
        return frozenset(range(self.n_nodes)) - self.v_inv

    def lift(self, nodes: Iterable[int]) -> frozenset[int]:
        """All K copies ``[A]`` of the nodes ``A`` inside the mixture DAG."""
        n = self.n_nodes
        return frozenset(j * n + v for j in range(self.k) for v in nodes)

    def to_dict(self) -> dict:
        return {
            "components": [g.to_dict() for g in self.components],
            "v_inv": sorted(self.v_inv),
            "weights": list(self.mixing_weights),
        }

    @classmethod
    def from_dict(cls, d) -> "MixtureSpec":
        comps = []
        for gd in d["components"]:
            g = graph_from_dict(gd)
            if not isinstance(g, Dag):
                raise GraphError("mixture components must be DAGs")
            comps.append(g)
        return cls(tuple(comps), frozenset(d.get("v_inv", ())), tuple(d.get("weights", ())))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "MixtureSpec":
        return cls.from_dict(json.loads(text))


def parent_invariant_nodes(components: Sequence[Dag]) -> frozenset[int]:
    """Nodes whose parent set is identical in every component."""
    n = components[0].n_nodes
    return frozenset(
        v for v in range(n) if all(g.parents(v) == components[0].parents(v) for g in components)
    )


def mixture_dag(spec: MixtureSpec) -> tuple[Dag, int]:
    """The mixture DAG on ``K * |V| + 1`` nodes and the index of its root ``y``."""
    n, k = spec.n_nodes, spec.k
    y = k * n
    edges = []
    for j, g in enumerate(spec.components):
        edges += [(j * n + u, j * n + v) for u, v in g.directed]
        edges += [(y, j * n + v) for v in sorted(spec.varying)]
    labels = [f"{lab}^{j + 1}" for j in range(k) for lab in spec.labels] + ["y"]
    return Dag(k * n + 1, edges, labels), y


def component_mags(spec: MixtureSpec) -> list[MixedGraph]:
    """MAG of each component: Algorithm-1 marginalization of ``V^(j) + {y}``."""
    d_mu, y = mixture_dag(spec)
    n = spec.n_nodes
    out = []
    for j in range(spec.k):
        sub = induced_subgraph(d_mu, list(range(j * n, (j + 1) * n)) + [y])
        m = marginalize_root(sub, n)
        out.append(m.with_labels(spec.labels))
    return out


def _check_same_nodes(mags: Sequence[MixedGraph]) -> int:
    if not mags:
        raise GraphError("need at least one graph")
    n = mags[0].n_nodes
    if any(m.n_nodes != n for m in mags):
        raise GraphError("graphs must share the node count")
    return n


def poset_compatible(mags: Sequence[MixedGraph]):
    """Whether all MAGs respect one partial order with bidirected pairs incomparable.

    Returns ``(ok, witness)``. On success the witness is the minimal strict
    order as a boolean matrix ``R[u, v]`` (u before v): the transitive closure
    of every strict ancestor relation. Any valid order contains it, so a cycle
    in it or a bidirected pair comparable under it rules out every order. On
    failure the witness is ``("cycle", node)`` or ``("bidirected", (u, v), j)``.
    """
    n = _check_same_nodes(mags)
    r = np.zeros((n, n), dtype=bool)
    for m in mags:
        for v in range(n):
            for u in m.ancestors(v):
                if u != v:
                    r[u, v] = True
    # Warshall closure
    for w in range(n):
        r |= np.outer(r[:, w], r[w, :])
    for v in range(n):
        if r[v, v]:
            return False, ("cycle", v)
    for j, m in enumerate(mags):
        for u, v in sorted(m.bidirected):
            if r[u, v] or r[v, u]:
                return False, ("bidirected", (u, v), j)
    return True, r


def union_graph(mags: Sequence[MixedGraph]) -> MixedGraph:
    """Edge-wise union of the component MAGs.

    Raises :class:`GraphError` if one pair gets both a directed and a
    bidirected edge (or opposite directions), which signals poset
    incompatibility.
    """
    n = _check_same_nodes(mags)
    di = set().union(*(m.directed for m in mags))
    bi = set().union(*(m.bidirected for m in mags))
    for u, v in di:
        if (v, u) in di:
            raise GraphError(f"conflicting directions between {u} and {v}")
        if (min(u, v), max(u, v)) in bi:
            raise GraphError(f"pair {(u, v)} is directed in one component and bidirected in another")
    return MixedGraph(n, di, bi, mags[0].labels)


def union_graph_lenient(mags: Sequence[MixedGraph]) -> MixedGraph:
    """Union without the conflict check; bidirected edges win over directed ones.

    Only for displaying incompatible examples: the result may be non-ancestral.
    """
    n = _check_same_nodes(mags)
    bi = set().union(*(m.bidirected for m in mags))
    di = {e for m in mags for e in m.directed if (min(e), max(e)) not in bi}
    di = {(u, v) for u, v in di if (v, u) not in di or u < v}
    return MixedGraph(n, di, bi, mags[0].labels)


def varying_nodes(g: MixedGraph) -> frozenset[int]:
    """Nodes incident to a bidirected edge."""
    return frozenset(v for e in g.bidirected for v in e)


def varying_nodes_from_pag(p: Pag) -> frozenset[int]:
    """Nodes incident to an arrow-arrow edge of a PAG."""
    return frozenset(v for (u, w), (mu, mw) in p.marks.items() if mu == ARROW and mw == ARROW for v in (u, w))


def bidirected_degree_ranking(p: Pag) -> list[tuple[int, int]]:
    counts = [0] * p.n_nodes
    for (u, v), (mu, mv) in p.marks.items():
        if mu == ARROW and mv == ARROW:
            counts[u] += 1
            counts[v] += 1
    return sorted(enumerate(counts), key=lambda t: (-t[1], t[0]))


# --- mother graph (comparison representation)


@dataclass(frozen=True)
class MotherGraph:
    """DAG over ``[V]`` plus one root ``y^(j)`` per component.

    Component node ``v^(j)`` is ``j * |V| + v``; root ``y^(j)`` is ``K * |V| + j``.
    """

    dag: Dag
    n_nodes: int
    k: int
    v_inv: frozenset[int] = field(default_factory=frozenset)

    def root(self, j: int) -> int:
        return self.k * self.n_nodes + j

    def is_root(self, x: int) -> bool:
        return x >= self.k * self.n_nodes

    def component(self, x: int) -> int:
        return x - self.k * self.n_nodes if self.is_root(x) else x // self.n_nodes

    def base(self, x: int) -> int | None:
        return None if self.is_root(x) else x % self.n_nodes


def mother_graph(spec: MixtureSpec) -> MotherGraph:
    n, k = spec.n_nodes, spec.k
    edges = []
    for j, g in enumerate(spec.components):
        edges += [(j * n + u, j * n + v) for u, v in g.directed]
        edges += [(k * n + j, j * n + v) for v in sorted(spec.varying)]
    labels = [f"{lab}^{j + 1}" for j in range(k) for lab in spec.labels]
    labels += [f"y^{j + 1}" for j in range(k)]
    return MotherGraph(Dag(k * n + k, edges, labels), n, k, spec.v_inv)


def _mother_steps(mg: MotherGraph):
    """Moves of an m-path: ``(from, via, to, kind)``.

    ``kind`` is ``"edge"`` for an ordinary edge (via is None) or ``"jump"``
    for the cross-component triple ``a^(j) -> c^(j) <- y^(j)``,
    ``y^(k) -> c^(k) <- b^(k)`` traversed from ``a^(j)`` through ``c`` to ``b^(k)``.
    """
    g = mg.dag
    steps = {x: [] for x in g.nodes}
    for x in g.nodes:
        for w in sorted(g.neighbors(x)):
            steps[x].append((w, None, "edge"))
    n = mg.n_nodes
    for c in range(n):
        copies = [j * n + c for j in range(mg.k) if mg.root(j) in g.parents(j * n + c)]
        for cj, ck in itertools.permutations(copies, 2):
            for a in sorted(g.parents(cj)):
                if mg.is_root(a):
                    continue
                for b in sorted(g.parents(ck)):
                    if not mg.is_root(b):
                        steps[a].append((b, (cj, ck), "jump"))
    return steps


def m_d_connected(mg: MotherGraph, set_a, set_b, set_c) -> bool:
    """m-d-connection of ``[A]`` and ``[B]`` given ``[C]`` in a mother graph.

    Searches simple m-paths: sequences of ordinary edges and cross-component
    jumps. Ordinary colliders and every jump node are m-colliders and must lie
    in ``[C]``; all other interior nodes must lie outside ``[C]``.
    """
    n, k = mg.n_nodes, mg.k
    lift = lambda s: {j * n + v for j in range(k) for v in s}  # noqa: E731
    la, lb, lc = lift(set_a), lift(set_b), lift(set_c)
    g = mg.dag
    steps = _mother_steps(mg)

    def interior_ok(prev, node, nxt, arrived_head):
        # node reached by an ordinary edge from prev; leaving by ordinary edge to nxt
        leave_head = g.mark(nxt, node) == ARROW
        collider = arrived_head and leave_head
        return (node in lc) if collider else (node not in lc)

    for start in sorted(la):
        # state: (current node, visited tuple, arrived with arrowhead at current?)
        stack = [(start, (start,), False)]
        while stack:
            x, visited, head = stack.pop()
            for nxt, via, kind in steps[x]:
                if kind == "edge":
                    if nxt in visited:
                        continue
                    if len(visited) > 1 and not interior_ok(visited[-2], x, nxt, head):
                        continue
                    new_head = g.mark(x, nxt) == ARROW
                    new_visited = visited + (nxt,)
                else:
                    cj, ck = via
                    if cj in visited or ck in visited or nxt in visited:
                        continue
                    # x leaves toward cj along x -> cj (tail at x)
                    if len(visited) > 1 and not interior_ok(visited[-2], x, cj, head):
                        continue
                    if cj not in lc:
                        continue
                    new_head = False  # b^(k) -> c^(k): tail at b
                    new_visited = visited + (cj, ck, nxt)
                if nxt in lb:
                    return True
                if nxt in la:
                    continue
                stack.append((nxt, new_visited, new_head))
    return False
