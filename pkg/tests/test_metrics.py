import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.cluster import KMeans
from sklearn.metrics import v_measure_score

from mixdag.graph_core import ARROW, CIRCLE, TAIL, Pag
from mixdag.metrics import (
    TrialResult,
    adjacency_tpr,
    kmeans,
    kmeans_inertia,
    normalized_shd,
    shd_counts,
    trial_results_csv,
    v_measure,
    varying_rates,
)

MARKS = st.sampled_from([TAIL, ARROW, CIRCLE])


@st.composite
def pags(draw, n=4):
    marks = {}
    for u in range(n):
        for v in range(u + 1, n):
            if draw(st.booleans()):
                marks[(u, v)] = (draw(MARKS), draw(MARKS))
    return Pag(n, marks)


def test_identical_zero():
    p = Pag(3, {(0, 1): (TAIL, ARROW), (1, 2): (CIRCLE, ARROW)})
    assert normalized_shd(p, p) == 0.0
    assert normalized_shd(Pag(3, {}), Pag(3, {})) == 0.0


@pytest.mark.parametrize("m", [1, 2, 5])
def test_extra_adjacency(m):
    common = {(i, i + 1): (TAIL, ARROW) for i in range(m)}
    p2 = Pag(m + 3, common)
    p1 = Pag(m + 3, {**common, (m + 1, m + 2): (CIRCLE, CIRCLE)})
    assert normalized_shd(p1, p2) == pytest.approx(1 / (2 * m + 1))


def test_circle_matches_anything():
    p1 = Pag(2, {(0, 1): (CIRCLE, ARROW)})
    p2 = Pag(2, {(0, 1): (ARROW, ARROW)})
    assert normalized_shd(p1, p2) == 0.0
    p3 = Pag(2, {(0, 1): (TAIL, TAIL)})
    assert shd_counts(p2, p3) == (2, 2)


def test_node_mismatch():
    with pytest.raises(ValueError):
        normalized_shd(Pag(2, {}), Pag(3, {}))


@settings(max_examples=100, deadline=None)
@given(pags(), pags())
def test_shd_symmetric_and_bounded(p1, p2):
    a, b = normalized_shd(p1, p2), normalized_shd(p2, p1)
    assert a == b and 0.0 <= a <= 1.0


def test_varying_rates():
    assert varying_rates({2, 3}, {2, 3}, range(4)) == (1.0, 0.0)
    assert varying_rates(set(), {2, 3}, range(4)) == (0.0, 0.0)
    assert varying_rates(range(4), {2, 3}, range(4)) == (1.0, 1.0)
    assert varying_rates(set(), set(), range(4)) == (1.0, 0.0)
    assert varying_rates({1}, set(), range(4)) == (1.0, 0.25)
    with pytest.raises(ValueError):
        varying_rates({9}, set(), range(4))


def test_adjacency_tpr():
    p = Pag(3, {(0, 1): (TAIL, ARROW)})
    assert adjacency_tpr(p, [(1, 0), (1, 2)]) == 0.5
    assert adjacency_tpr(p, []) == 1.0


def test_kmeans_two_clouds():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(-100, 1, (50, 2)), rng.normal(100, 1, (50, 2))])
    lab = kmeans(x, 2, seed=0)
    assert len(set(lab[:50])) == 1 and len(set(lab[50:])) == 1 and lab[0] != lab[-1]


def test_kmeans_edge_cases():
    x = np.random.default_rng(1).standard_normal((12, 3))
    assert len(set(kmeans(x, 1, seed=0))) == 1
    full = kmeans(x, 12, seed=0)
    assert kmeans_inertia(x, full) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        kmeans(x, 13)
    assert np.array_equal(kmeans(x, 3, seed=4), kmeans(x, 3, seed=4))


def test_kmeans_monotone_objective():
    x = np.random.default_rng(2).standard_normal((300, 4))
    kmeans(x, 5, seed=0, check_monotone=True)


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_close_to_sklearn(seed):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 4, (3, 2))
    x = np.vstack([c + rng.standard_normal((100, 2)) for c in centers])
    ours = kmeans_inertia(x, kmeans(x, 3, seed=seed))
    ref = KMeans(3, n_init=10, random_state=seed).fit(x).inertia_
    assert ours <= ref * 1.01


def test_v_measure_examples():
    assert v_measure([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)
    assert v_measure([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0
    assert v_measure([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        v_measure([0, 1], [0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2)), min_size=2, max_size=40))
def test_v_measure_matches_sklearn(pairs):
    labels, truth = zip(*pairs)
    assert v_measure(labels, truth) == pytest.approx(v_measure_score(truth, labels), abs=1e-10)
    perm = {0: 3, 1: 0, 2: 1, 3: 2}
    assert v_measure([perm[x] for x in labels], truth) == pytest.approx(v_measure(labels, truth), abs=1e-12)


def test_trial_result_validation_and_csv():
    with pytest.raises(ValueError):
        TrialResult(0, 0, 0.05, normalized_shd=1.5)
    r = TrialResult(0, 7, 0.05, normalized_shd=0.25, tpr=1.0, fpr=0.0, runtime_ms=3.0)
    text = trial_results_csv([r])
    assert text.splitlines()[0] == "trial,seed,alpha,normalized_shd,tpr,fpr,adjacency_tpr,v_measure_all,v_measure_varying,runtime_ms"
    assert "runtime_ms" not in trial_results_csv([r], include_runtime=False)
