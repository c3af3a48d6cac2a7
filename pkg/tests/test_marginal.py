import itertools

import numpy as np
import pytest

from mixdag.generators import random_mixture_spec, random_rooted_dag
from mixdag.graph_core import Dag, GraphError
from mixdag.marginal import marginalize_root, mixture_mag
from mixdag.mixture import MixtureSpec, mixture_dag
from mixdag.separation import d_separated, is_ancestral, is_maximal, m_separated
from oracles import d_separated_moral, is_ancestral_ref, maximal_ref


def test_component_one():
    # 1 -> 2, y -> 2, y -> 3 with y = index 4
    m = marginalize_root(Dag(5, [(0, 1), (4, 1), (4, 2)]), 4)
    assert m.directed == {(0, 1)} and m.bidirected == {(1, 2)}


def test_component_two():
    m = marginalize_root(Dag(5, [(3, 2), (4, 1), (4, 2)]), 4)
    assert m.directed == {(3, 2)} and m.bidirected == {(1, 2)}


def test_childless_root():
    d = Dag(4, [(0, 1), (1, 2)])
    m = marginalize_root(d, 3)
    assert m.directed == {(0, 1), (1, 2)} and not m.bidirected


def test_root_must_have_no_parents():
    with pytest.raises(GraphError):
        marginalize_root(Dag(3, [(0, 1), (1, 2)]), 1)


def test_root_in_middle_shifts_indices():
    # y = 0 -> 1, y -> 2, 1 -> 2
    m = marginalize_root(Dag(3, [(0, 1), (0, 2), (1, 2)]), 0)
    assert m.n_nodes == 2 and m.directed == {(0, 1)} and not m.bidirected


def test_step_two_adds_parent_edges():
    # t -> u, y -> u, y -> v, u -> v: t must point into v after marginalizing
    t, u, v, y = 0, 1, 2, 3
    m = marginalize_root(Dag(4, [(t, u), (y, u), (y, v), (u, v)]), y)
    assert m.directed == {(t, u), (t, v), (u, v)}
    assert not m.bidirected


def test_mixture_mag_two_chain(chain_spec):
    d, y = mixture_dag(chain_spec)
    mm = mixture_mag(d, y)
    assert mm.directed == {(0, 1), (7, 6)}
    assert mm.bidirected == {tuple(sorted(p)) for p in itertools.combinations([1, 2, 5, 6], 2)}


def test_single_invariant_component_is_unchanged():
    dag = Dag(3, [(0, 1), (1, 2)])
    d, y = mixture_dag(MixtureSpec((dag,), frozenset(range(3))))
    mm = mixture_mag(d, y)
    assert mm.directed == dag.directed and not mm.bidirected


@pytest.mark.parametrize("seed", range(6))
def test_mixture_mag_preserves_separation(seed):
    rng = np.random.default_rng(seed)
    spec = random_mixture_spec(rng, 2, 5)
    d, y = mixture_dag(spec)
    mm = mixture_mag(d, y)
    nodes = range(mm.n_nodes)
    for a, b in itertools.combinations(nodes, 2):
        rest = [v for v in nodes if v not in (a, b)]
        for k in range(4):
            for c in itertools.combinations(rest, k):
                assert m_separated(mm, {a}, {b}, set(c)) == d_separated_moral(d.n_nodes, d.directed, {a}, {b}, c)


def test_outputs_are_mags_against_reference():
    rng = np.random.default_rng(8)
    for _ in range(60):
        d, y = random_rooted_dag(rng, int(rng.integers(1, 6)))
        m = marginalize_root(d, y)
        bi = {tuple(sorted(e)) for e in m.bidirected}
        assert is_ancestral(m) and is_ancestral_ref(m.n_nodes, m.directed, bi)
        assert is_maximal(m) and maximal_ref(m.n_nodes, m.directed, bi)


def test_skipping_replacement_breaks_ancestrality():
    # y -> u, y -> v, u -> v yields u <-> v alongside u -> v unless step 3 runs
    bad = 0
    rng = np.random.default_rng(0)
    for _ in range(200):
        d, y = random_rooted_dag(rng, 4, child_prob=0.7)
        try:
            m = marginalize_root(d, y, skip_replacement=True)
        except GraphError:
            bad += 1
            continue
        bad += not is_ancestral(m)
    assert bad > 0
