"""Synthetic mixture models: linear-Gaussian SEMs and enumerable discrete mixtures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph_core import Dag, GraphError, MixedGraph
from .mixture import MixtureSpec, component_mags, parent_invariant_nodes, poset_compatible

WEIGHT_LOW = 0.25
WEIGHT_HIGH = 2.0
NOISE_MEAN_RANGE = 2.0
MAX_REJECTIONS = 1000


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _signed_weights(rng, size):
    mag = rng.uniform(WEIGHT_LOW, WEIGHT_HIGH, size=size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * mag


@dataclass(frozen=True)
class GaussianMixtureSem:
    """K linear-Gaussian SEMs sharing edge weights, noise means and noise scales.

    ``weights[j][u, v]`` is the coefficient of ``X_u`` in the equation of
    ``X_v`` for component ``j`` (zero iff ``u -> v`` is absent).
    """

    spec: MixtureSpec
    weights: tuple[np.ndarray, ...]
    noise_means: np.ndarray
    noise_sds: np.ndarray
    order: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def n_nodes(self) -> int:
        return self.spec.n_nodes


def random_component_dags(k: int, n_nodes: int, rng, degree: float | None = None):
    """K Erdos-Renyi DAGs respecting one random topological order.

    Each forward pair is an edge with probability ``degree / (n_nodes - 1)``,
    ``degree`` defaulting to ``1.5 / k``.
    """
    if degree is None:
        degree = 1.5 / k
    p = degree / (n_nodes - 1) if n_nodes > 1 else 0.0
    order = rng.permutation(n_nodes)
    dags = []
    for _ in range(k):
        edges = [
            (int(order[i]), int(order[j]))
            for i in range(n_nodes)
            for j in range(i + 1, n_nodes)
            if rng.random() < p
        ]
        dags.append(Dag(n_nodes, edges))
    return dags, tuple(int(v) for v in order)


def random_mixture_sem(k: int, n_nodes: int, seed=None, *, degree: float | None = None) -> GaussianMixtureSem:
    """Draw a poset-compatible mixture of linear-Gaussian SEMs.

    Candidate weights are drawn once per ordered node pair so an edge shared
    by several components carries the same coefficient. Draws whose component
    MAGs are not poset compatible are discarded and redrawn.
    """
    if k < 1 or n_nodes < 1:
        raise ValueError("k and n_nodes must be positive")
    rng = _rng(seed)
    for _ in range(MAX_REJECTIONS):
        dags, order = random_component_dags(k, n_nodes, rng, degree)
        w_all = _signed_weights(rng, (n_nodes, n_nodes))
        means = rng.uniform(-NOISE_MEAN_RANGE, NOISE_MEAN_RANGE, size=n_nodes)
        spec = MixtureSpec(tuple(dags), parent_invariant_nodes(dags))
        if not poset_compatible(component_mags(spec))[0]:
            continue
        weights = []
        for g in dags:
            w = np.zeros((n_nodes, n_nodes))
            for u, v in g.directed:
                w[u, v] = w_all[u, v]
            weights.append(w)
        return GaussianMixtureSem(spec, tuple(weights), means, np.ones(n_nodes), order)
    raise RuntimeError(f"no poset-compatible draw in {MAX_REJECTIONS} attempts")


def _mixing_matrix(w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    a = np.eye(n) - w.T
    # strictly triangular under a topological order, so always invertible
    assert abs(np.linalg.det(a)) > 0
    return np.linalg.inv(a)


def component_moments(sem: GaussianMixtureSem, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance of component ``j``."""
    if not 0 <= j < sem.k:
        raise IndexError(j)
    m = _mixing_matrix(sem.weights[j])
    mean = m @ sem.noise_means
    cov = m @ np.diag(sem.noise_sds**2) @ m.T
    return mean, cov


def allocate_counts(n: int, proportions: Sequence[float]) -> np.ndarray:
    """Split ``n`` into per-component counts by largest-remainder rounding."""
    p = np.asarray(proportions, dtype=float)
    if np.any(p < 0):
        raise ValueError("proportions must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("proportions must sum to 1")
    raw = n * p
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    # ties go to the lower component index
    extra = np.argsort(-(raw - counts), kind="stable")[:short]
    counts[extra] += 1
    return counts


def _sample_linear(w, means, sds, n, rng):
    eps = rng.standard_normal((n, len(means))) * sds + means
    return eps @ _mixing_matrix(w).T


def sample(sem: GaussianMixtureSem, n: int, proportions: Sequence[float] | None = None, seed=None):
    """Draw ``n`` rows from the mixture; returns ``(data, labels)``.

    Component ``j`` contributes ``round(n * p_j)`` rows (largest remainder),
    rows are shuffled, and ``labels`` records each row's component.
    """
    if proportions is None:
        proportions = [1.0 / sem.k] * sem.k
    rng = _rng(seed)
    counts = allocate_counts(n, proportions)
    blocks, labels = [], []
    for j, c in enumerate(counts):
        blocks.append(_sample_linear(sem.weights[j], sem.noise_means, sem.noise_sds, c, rng))
        labels.append(np.full(c, j, dtype=int))
    data = np.vstack(blocks) if blocks else np.empty((0, sem.n_nodes))
    lab = np.concatenate(labels)
    perm = rng.permutation(n)
    return data[perm], lab[perm]


def dirichlet_proportions(k: int, alpha: float = 2.0, seed=None) -> np.ndarray:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    p = _rng(seed).dirichlet([alpha] * k)
    return p / p.sum()


def union_sem_sample(sem: GaussianMixtureSem, union: MixedGraph, n: int, seed=None) -> np.ndarray:
    """Sample ``n`` rows from a linear SEM on the union MAG.

    Directed edges reuse the mixture coefficient of the pair (edges absent
    from every component draw a fresh coefficient from the same range); each
    bidirected edge becomes an unobserved standard-normal parent with unit
    coefficients into both endpoints. Noise means and scales are the
    mixture's. Latent columns are not returned.
    """
    rng = _rng(seed)
    p = sem.n_nodes
    w_mix = np.zeros((p, p))
    for w in sem.weights:
        w_mix = np.where(w != 0, w, w_mix)
    bidir = sorted(union.bidirected)
    size = p + len(bidir)
    w = np.zeros((size, size))
    extra = _signed_weights(rng, (p, p))
    for u, v in sorted(union.directed):
        w[u, v] = w_mix[u, v] if w_mix[u, v] != 0 else extra[u, v]
    for i, (u, v) in enumerate(bidir):
        w[p + i, u] = 1.0
        w[p + i, v] = 1.0
    means = np.concatenate([sem.noise_means, np.zeros(len(bidir))])
    sds = np.concatenate([sem.noise_sds, np.ones(len(bidir))])
    return _sample_linear(w, means, sds, n, rng)[:, :p]


# --- discrete mixtures


@dataclass(frozen=True)
class DiscreteMixture:
    """K discrete Bayesian networks with mixing weights.

    ``cpts[j][v]`` has one axis per parent of ``v`` in component ``j``
    (ascending parent index) followed by the axis of ``v`` itself.
    """

    spec: MixtureSpec
    cardinalities: tuple[int, ...]
    cpts: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        for j, g in enumerate(self.spec.components):
            for v in range(self.spec.n_nodes):
                t = self.cpts[j][v]
                pa = sorted(g.parents(v))
                want = tuple(self.cardinalities[u] for u in pa) + (self.cardinalities[v],)
                if t.shape != want:
                    raise GraphError(f"cpt shape {t.shape} for node {v} in component {j}, expected {want}")
                if np.max(np.abs(t.sum(axis=-1) - 1.0)) > 1e-12:
                    raise GraphError(f"cpt rows of node {v} in component {j} do not sum to 1")
        for v in self.spec.v_inv:
            for j in range(1, self.spec.k):
                same_pa = self.spec.components[j].parents(v) == self.spec.components[0].parents(v)
                if not same_pa or not np.array_equal(self.cpts[j][v], self.cpts[0][v]):
                    raise GraphError(f"invariant node {v} differs across components")


def random_discrete_mixture(spec: MixtureSpec, seed=None, cardinality: int = 2, concentration: float = 1.0):
    """Random CPTs (Dirichlet rows) with invariant nodes sharing their tables."""
    rng = _rng(seed)
    if not spec.v_inv <= parent_invariant_nodes(spec.components):
        raise GraphError("invariant nodes must have the same parents in every component")
    n = spec.n_nodes
    cards = (cardinality,) * n
    cpts = []
    for j, g in enumerate(spec.components):
        row = []
        for v in range(n):
            if j > 0 and v in spec.v_inv:
                row.append(cpts[0][v])
                continue
            shape = tuple(cards[u] for u in sorted(g.parents(v)))
            t = rng.dirichlet([concentration] * cards[v], size=shape or None)
            row.append(np.asarray(t).reshape(shape + (cards[v],)))
        cpts.append(tuple(row))
    return DiscreteMixture(spec, cards, tuple(cpts))


def component_joint(dm: DiscreteMixture, j: int) -> np.ndarray:
    cards = dm.cardinalities
    n = len(cards)
    g = dm.spec.components[j]
    joint = np.ones(cards)
    for v in range(n):
        axes = sorted(g.parents(v)) + [v]
        t = dm.cpts[j][v].transpose(np.argsort(axes))
        shape = [1] * n
        for a in sorted(axes):
            shape[a] = cards[a]
        joint = joint * t.reshape(shape)
    return joint


def exact_joint(dm: DiscreteMixture, max_states: int = 10**6) -> np.ndarray:
    """Mixture probability table ``sum_j p_J(j) prod_v p_j(x_v | x_pa)``."""
    size = int(np.prod(dm.cardinalities))
    if size > max_states:
        raise ValueError(f"state space of size {size} exceeds {max_states}")
    joint = np.zeros(dm.cardinalities)
    for j, w in enumerate(dm.spec.mixing_weights):
        if w > 0:
            joint += w * component_joint(dm, j)
    return joint


# --- two-component Gaussian example with a cancelling mixture


def _normal_pdf(x, var):
    return np.exp(-0.5 * x**2 / var) / np.sqrt(2 * np.pi * var)


def example31_density_gap(
    mixing: Sequence[float] = (0.5, 0.5),
    perturbed_variance: float = 2.001,
    step: float = 0.1,
    half_width: float = 6.0,
) -> tuple[float, float]:
    """Sup-norm gap between ``p(x2, x3)`` and ``p(x2) p(x3)`` on a grid.

    Component 1 has ``X2 = X1 + noise`` (marginal variance 2) and ``X3``
    standard normal; component 2 has ``X2`` with variance ``v`` and
    ``X3 = X4 + noise`` (variance 2). With ``v = 2`` the mixture factorizes
    exactly. Returns the gaps for ``v = 2`` and ``v = perturbed_variance``.
    """
    w1, w2 = mixing
    grid = np.arange(-half_width, half_width + step / 2, step)
    x2, x3 = np.meshgrid(grid, grid, indexing="ij")

    def gap(var2):
        joint = w1 * _normal_pdf(x2, 2.0) * _normal_pdf(x3, 1.0) + w2 * _normal_pdf(x2, var2) * _normal_pdf(x3, 2.0)
        m2 = w1 * _normal_pdf(x2, 2.0) + w2 * _normal_pdf(x2, var2)
        m3 = w1 * _normal_pdf(x3, 1.0) + w2 * _normal_pdf(x3, 2.0)
        return float(np.max(np.abs(joint - m2 * m3)))

    return gap(2.0), gap(perturbed_variance)
