"""Marginal ancestral graph of a DAG with respect to one in-degree-0 node."""

from __future__ import annotations

from .graph_core import Dag, GraphError, MixedGraph, ancestors


def marginalize_root(d: Dag, y: int, *, skip_replacement: bool = False) -> MixedGraph:
    """Marginalize the root ``y`` out of ``d``.

    1. Every pair of children of ``y`` gets a bidirected edge.
    2. For ``t -> u`` in ``d`` and ``u <-> v`` from step 1 with ``u`` an
       ancestor of ``v`` in ``d``, add ``t -> v``.
    3. Every ``u <-> v`` with ``u`` an ancestor of ``v`` becomes ``u -> v``.
    4. Drop ``y``; remaining nodes keep their order (indices above ``y`` shift down).

    Original edges among the observed nodes are kept. ``skip_replacement``
    disables step 3 and exists only to exercise the MAG checks with a
    known-broken construction.
    """
    if not 0 <= y < d.n_nodes:
        raise GraphError(f"node {y} out of range")
    if d.parents(y):
        raise GraphError(f"node {y} has nonzero in-degree")
    ch = sorted(d.children(y))
    an = {v: ancestors(d, v) for v in ch}

    bi = {(u, v) for i, u in enumerate(ch) for v in ch[i + 1:]}
    di = {(u, v) for u, v in d.directed if u != y}

    # step 2 against the fixed step-1 set; both orientations of each pair
    for a, b in bi:
        for u, v in ((a, b), (b, a)):
            if u in an[v]:
                for t in d.parents(u):
                    if t != y:
                        di.add((t, v))

    if not skip_replacement:
        for u, v in list(bi):
            if u in an[v]:
                bi.discard((u, v))
                di.add((u, v))
            elif v in an[u]:
                bi.discard((u, v))
                di.add((v, u))
    else:
        # keep the bidirected edge; directed duplicates on the same pair are dropped
        di = {(u, v) for u, v in di if (min(u, v), max(u, v)) not in bi}

    # any remaining directed/bidirected overlap defers to the bidirected edge's
    # step-3 outcome, which already moved it into `di`
    di = {(u, v) for u, v in di if (min(u, v), max(u, v)) not in bi}

    def shift(v):
        return v - 1 if v > y else v

    labels = [lab for i, lab in enumerate(d.labels) if i != y]
    return MixedGraph(
        d.n_nodes - 1,
        [(shift(u), shift(v)) for u, v in di],
        [(shift(u), shift(v)) for u, v in bi],
        labels,
    )


def mixture_mag(d_mu: Dag, y: int) -> MixedGraph:
    """Marginal MAG of a full mixture DAG with respect to its root ``y``."""
    return marginalize_root(d_mu, y)
