import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixdag.ci import (
    CITestWarning,
    ExactDiscreteOracle,
    FisherZOracle,
    PopulationGaussianOracle,
    exact_discrete_ci,
    fisher_z,
    fisher_z_statistic,
    graphical_oracle,
    partial_correlation,
    population_gaussian_ci,
)
from mixdag.generators import random_dag
from mixdag.graph_core import MixedGraph
from mixdag.mixture import component_mags, mixture_dag, union_graph
from mixdag.mixture import MixtureSpec
from mixdag.sem import GaussianMixtureSem, component_moments
from mixdag.separation import d_separated
from oracles import ci_by_enumeration

# frozen 5-sample fixture
FIVE = np.array(
    [
        [0.3, 1.2, -0.7],
        [1.1, 0.4, 0.2],
        [-0.8, -1.5, 0.9],
        [0.5, 0.9, -1.1],
        [-1.4, -0.2, 0.6],
    ]
)


def _hand_partial_corr(x, a, b, c):
    """Regress a and b on c by least squares, then correlate residuals."""
    z = np.column_stack([np.ones(len(x)), x[:, c]])
    ra = x[:, a] - z @ np.linalg.lstsq(z, x[:, a], rcond=None)[0]
    rb = x[:, b] - z @ np.linalg.lstsq(z, x[:, b], rcond=None)[0]
    return float(ra @ rb / np.sqrt((ra @ ra) * (rb @ rb)))


def test_partial_correlation_matches_residual_method():
    corr = np.corrcoef(FIVE, rowvar=False)
    r, _ = partial_correlation(corr, 0, 1, [2])
    assert r == pytest.approx(_hand_partial_corr(FIVE, 0, 1, [2]), abs=1e-12)
    r0, _ = partial_correlation(corr, 0, 1, [])
    assert r0 == pytest.approx(np.corrcoef(FIVE[:, 0], FIVE[:, 1])[0, 1], abs=1e-12)


def test_statistic_arithmetic():
    r = 0.3
    assert fisher_z_statistic(r, 100, 2) == pytest.approx(np.sqrt(95) * 0.5 * np.log(1.3 / 0.7), abs=1e-12)
    assert fisher_z_statistic(1.0, 10, 0) == float("inf")


def test_identical_columns_dependent():
    x = np.random.default_rng(0).standard_normal((20, 1))
    data = np.hstack([x, x, np.random.default_rng(1).standard_normal((20, 1))])
    assert not fisher_z(data, 0, 1, alpha=0.05)


def test_orthogonal_columns_independent():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(50)
    a -= a.mean()
    b = rng.standard_normal(50)
    b -= b.mean()
    b -= (b @ a) / (a @ a) * a
    assert fisher_z(np.column_stack([a, b]), 0, 1, alpha=0.999)


def test_insufficient_samples():
    with pytest.raises(ValueError):
        fisher_z(FIVE[:4], 0, 1, [2])


def test_singular_block_warns_dependent():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    y = rng.standard_normal(50)
    data = np.column_stack([x, y, x + y, rng.standard_normal(50)])
    with pytest.warns(CITestWarning):
        assert not fisher_z(data, 0, 1, [2, 3])
    oracle = FisherZOracle(data)
    assert not oracle.independent(0, 1, [2, 3])
    assert oracle.n_singular == 1


def test_fisher_symmetry():
    rng = np.random.default_rng(3)
    data = rng.standard_normal((200, 5))
    data[:, 1] += 0.2 * data[:, 0]
    for a, b in itertools.permutations(range(5), 2):
        assert fisher_z(data, a, b, [], 0.05) == fisher_z(data, b, a, [], 0.05)


def test_oracle_cache_and_alpha_reuse():
    rng = np.random.default_rng(1)
    data = rng.standard_normal((300, 3))
    o = FisherZOracle(data, 0.05)
    o.independent(0, 1, [2])
    o.independent(1, 0, [2])
    assert o.n_queries == 1
    o2 = o.with_alpha(0.5)
    assert o2.corr is o.corr and o2.alpha == 0.5 and o2.n_queries == 0


def test_exact_product_distribution():
    rng = np.random.default_rng(0)
    ps = [rng.dirichlet([1, 1]) for _ in range(3)]
    joint = np.einsum("i,j,k->ijk", *ps)
    for a, b in itertools.permutations(range(3), 2):
        c = [v for v in range(3) if v not in (a, b)]
        assert exact_discrete_ci(joint, [a], [b], [])
        assert exact_discrete_ci(joint, [a], [b], c)


def test_exact_chain():
    rng = np.random.default_rng(2)
    px = rng.dirichlet([1, 1])
    py = rng.dirichlet([1, 1], size=2)
    pz = rng.dirichlet([1, 1], size=2)
    joint = np.einsum("i,ij,jk->ijk", px, py, pz)
    assert exact_discrete_ci(joint, [0], [2], [1])
    assert not exact_discrete_ci(joint, [0], [2], [])


def test_exact_mixture_marginal_dependence(chain_spec):
    from mixdag.sem import exact_joint, random_discrete_mixture

    joint = exact_joint(random_discrete_mixture(chain_spec, 3))
    assert not exact_discrete_ci(joint, [1], [2], [])


def test_exact_validation():
    joint = np.full((2, 2), 0.25)
    with pytest.raises(ValueError):
        exact_discrete_ci(joint, [0], [0])
    with pytest.raises(ValueError):
        exact_discrete_ci(joint, [0], [1], tol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_exact_matches_enumeration_and_axioms(seed):
    rng = np.random.default_rng(seed)
    joint = rng.dirichlet(np.ones(16)).reshape(2, 2, 2, 2)
    # make some independences hold
    if seed % 2:
        joint = np.einsum("ij,k,l->ijkl", joint.sum(axis=(2, 3)), joint.sum(axis=(0, 1, 3)), joint.sum(axis=(0, 1, 2)))
    for a, b in itertools.combinations(range(4), 2):
        rest = [v for v in range(4) if v not in (a, b)]
        for k in range(3):
            for c in itertools.combinations(rest, k):
                got = exact_discrete_ci(joint, [a], [b], c)
                assert got == ci_by_enumeration(joint, [a], [b], c)
                assert got == exact_discrete_ci(joint, [b], [a], c)
    # decomposition: A _||_ {B, D} | C implies A _||_ B | C
    if exact_discrete_ci(joint, [0], [2, 3], []):
        assert exact_discrete_ci(joint, [0], [2], []) and exact_discrete_ci(joint, [0], [3], [])


def test_population_identity_and_chain():
    assert population_gaussian_ci(np.eye(3), 0, 1, [2])
    w = 0.8
    cov = np.array([[1, w], [w, w * w + 1]])
    assert not population_gaussian_ci(cov, 0, 1)
    r = cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1])
    assert r == pytest.approx(w / np.sqrt(w * w + 1))
    with pytest.raises(ValueError):
        population_gaussian_ci(np.array([[1, 2], [2, 1]]), 0, 1)


@pytest.mark.parametrize("seed", range(10))
def test_population_matches_d_separation(seed):
    rng = np.random.default_rng(seed)
    n = 6
    dag = random_dag(rng, n, 0.4)
    w = np.zeros((n, n))
    for u, v in dag.directed:
        w[u, v] = rng.uniform(0.25, 2) * rng.choice([-1, 1])
    sem = GaussianMixtureSem(MixtureSpec((dag,), frozenset(range(n))), (w,), np.zeros(n), np.ones(n))
    _, cov = component_moments(sem, 0)
    oracle = PopulationGaussianOracle(cov)
    for a, b in itertools.combinations(range(n), 2):
        rest = [v for v in range(n) if v not in (a, b)]
        for k in range(len(rest) + 1):
            for c in itertools.combinations(rest, k):
                assert oracle.independent(a, b, c) == d_separated(dag, {a}, {b}, set(c))


def test_graphical_oracle(chain_spec):
    u = union_graph(component_mags(chain_spec))
    o = graphical_oracle(u)
    assert o.independent(0, 3, [])
    assert not o.independent(0, 3, [1, 2])
    d, _ = mixture_dag(chain_spec)
    lifted = graphical_oracle(d, lift=(2, 4))
    for a, b in itertools.combinations(range(4), 2):
        rest = [v for v in range(4) if v not in (a, b)]
        for k in range(3):
            for c in itertools.combinations(rest, k):
                assert lifted.independent(a, b, c) == o.independent(a, b, c)
    empty = graphical_oracle(MixedGraph(3))
    assert empty.independent(0, 1) and empty.independent(0, 2, [1])


def test_exact_oracle_wraps_function():
    joint = np.full((2, 2, 2), 1 / 8)
    o = ExactDiscreteOracle(joint)
    assert o(0, 1, [2]) and o.kind == "exact"
