import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixdag.graph_core import (
    ARROW,
    CIRCLE,
    TAIL,
    CycleError,
    Dag,
    GraphError,
    MixedGraph,
    Pag,
    ancestors,
    descendants,
    graph_from_json,
    graph_to_json,
    induced_subgraph,
    topological_order,
)
from mixdag.generators import random_dag
from mixdag.mixture import mixture_dag
from oracles import ancestors_by_paths


def test_ancestors_include_self():
    g = Dag(4, [(0, 1)])
    assert ancestors(g, 1) == {0, 1}
    assert ancestors(g, 3) == {3}
    assert descendants(g, 0) == {0, 1}


def test_ancestors_out_of_range():
    with pytest.raises(GraphError):
        ancestors(Dag(2), 5)


@pytest.mark.parametrize("seed", range(10))
def test_ancestors_match_path_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(rng, 8, 0.35)
    for v in range(8):
        assert ancestors(g, v) == ancestors_by_paths(8, g.directed, v)


def test_topological_order_tie_break():
    assert topological_order(Dag(3, [(0, 1), (1, 2)])) == [0, 1, 2]
    assert topological_order(Dag(3)) == [0, 1, 2]
    assert topological_order(Dag(3, [(2, 0)])) == [1, 2, 0]


def test_mixture_dag_root_first(chain_spec):
    d, y = mixture_dag(chain_spec)
    order = topological_order(d)
    for c in d.children(y):
        assert order.index(y) < order.index(c)


def test_cycle_rejected():
    with pytest.raises(CycleError) as exc:
        Dag(3, [(0, 1), (1, 2), (2, 0)])
    assert set(exc.value.cycle) == {0, 1, 2}


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.data())
def test_any_cycle_rejected(n, data):
    cyc = data.draw(st.permutations(range(n)))[: data.draw(st.integers(2, n))]
    edges = list(zip(cyc, cyc[1:] + cyc[:1]))
    extra = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=5))
    edges += [(u, v) for u, v in extra if u != v and (v, u) not in edges and (u, v) not in edges]
    with pytest.raises(GraphError):
        Dag(n, edges)


def test_one_edge_per_pair():
    with pytest.raises(GraphError):
        MixedGraph(3, [(0, 1)], [(0, 1)])
    with pytest.raises(GraphError):
        MixedGraph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        MixedGraph(3, [(1, 1)])


def test_marks():
    g = MixedGraph(3, [(0, 1)], [(1, 2)])
    assert g.mark(0, 1) == ARROW and g.mark(1, 0) == TAIL
    assert g.mark(2, 1) == ARROW and g.mark(1, 2) == ARROW
    assert g.mark(0, 2) is None


def test_induced_subgraph_mixture_component(chain_spec):
    d, y = mixture_dag(chain_spec)
    sub = induced_subgraph(d, [0, 1, 2, 3, y])
    # indices: 1..4 -> 0..3, y -> 4
    assert sub.directed == {(0, 1), (4, 1), (4, 2)}
    assert sub.labels[4] == "y"


def test_induced_identity_and_empty():
    g = MixedGraph(4, [(0, 1), (2, 3)], [(1, 2)])
    assert induced_subgraph(g, range(4)) == g
    assert induced_subgraph(g, []).n_nodes == 0


@pytest.mark.parametrize("seed", range(5))
def test_ancestors_transitive(seed):
    g = random_dag(np.random.default_rng(seed), 7, 0.4)
    for u, v, w in itertools.product(range(7), repeat=3):
        if u in ancestors(g, v) and v in ancestors(g, w):
            assert u in ancestors(g, w)


def test_json_roundtrip():
    g = MixedGraph(3, [(0, 1)], [(1, 2)], ["a", "b", "c"])
    h = graph_from_json(graph_to_json(g))
    assert h == g and h.labels == ("a", "b", "c")
    d = Dag(3, [(0, 2)])
    assert isinstance(graph_from_json(graph_to_json(d)), Dag)
    p = Pag(3, {(0, 1): (CIRCLE, ARROW), (1, 2): (ARROW, ARROW)})
    q = graph_from_json(graph_to_json(p))
    assert isinstance(q, Pag) and q == p
    assert graph_to_json(p).count("circle") == 1


def test_pag_normalizes_pairs():
    p = Pag(2, {(1, 0): (TAIL, ARROW)})
    assert p.marks == {(0, 1): (ARROW, TAIL)}
    assert p.mark(1, 0) == ARROW
