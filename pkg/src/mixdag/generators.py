"""Random small graphs and mixtures for property suites."""

from __future__ import annotations

import numpy as np

from .graph_core import Dag, MixedGraph
from .mixture import MixtureSpec, component_mags, parent_invariant_nodes, poset_compatible
from .separation import is_ancestral, is_maximal


def random_dag(rng: np.random.Generator, n: int, p: float, order=None) -> Dag:
    order = rng.permutation(n) if order is None else order
    edges = [
        (int(order[i]), int(order[j]))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    return Dag(n, edges)


def random_mixture_spec(
    rng: np.random.Generator,
    k: int,
    n: int,
    p: float = 0.4,
    invariant_prob: float = 0.5,
) -> MixtureSpec:
    """K DAGs sharing a random order; each parent-invariant node is invariant with ``invariant_prob``.

    With ``k == 1`` every node is invariant, since one component has nothing to vary against.
    """
    order = rng.permutation(n)
    comps = tuple(random_dag(rng, n, p, order) for _ in range(k))
    if k == 1:
        return MixtureSpec(comps, frozenset(range(n)))
    cand = sorted(parent_invariant_nodes(comps))
    v_inv = frozenset(v for v in cand if rng.random() < invariant_prob)
    return MixtureSpec(comps, v_inv)


def random_compatible_spec(rng, k_max=3, n_max=6, n_min=2, p=0.4, max_tries=1000) -> MixtureSpec:
    for _ in range(max_tries):
        k = int(rng.integers(1, k_max + 1))
        n = int(rng.integers(n_min, n_max + 1))
        spec = random_mixture_spec(rng, k, n, p)
        if poset_compatible(component_mags(spec))[0]:
            return spec
    raise RuntimeError("no poset-compatible spec found")


def random_rooted_dag(rng, n: int, p: float = 0.4, child_prob: float = 0.5) -> tuple[Dag, int]:
    """DAG on ``n + 1`` nodes whose last node is an in-degree-0 root."""
    base = random_dag(rng, n, p)
    kids = [(n, v) for v in range(n) if rng.random() < child_prob]
    return Dag(n + 1, list(base.directed) + kids), n


def random_mag(rng, n: int, p_dir: float = 0.3, p_bi: float = 0.2, max_tries: int = 10000) -> MixedGraph:
    """A random MAG drawn by rejection from random order-respecting mixed graphs."""
    for _ in range(max_tries):
        order = rng.permutation(n)
        d, b = [], []
        for i in range(n):
            for j in range(i + 1, n):
                r = rng.random()
                u, v = int(order[i]), int(order[j])
                if r < p_dir:
                    d.append((u, v))
                elif r < p_dir + p_bi:
                    b.append((u, v))
        g = MixedGraph(n, d, b)
        if is_ancestral(g) and is_maximal(g):
            return g
    raise RuntimeError("no MAG drawn")
