import cmath
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphcanon.errors import AlreadyConnected, BadRatio, CycleError, IndexOutOfRange, NotConnected
from graphcanon.forests import DiForest, Forest, LabeledUnionFind, PathStep


def test_connected_examples():
    assert not Forest(3).connected(1, 2)
    f = Forest(3, [(1, 2), (2, 3)])
    assert f.connected(1, 3)
    assert Forest(3, [(1, 2)]).connected(3, 3)


def test_add_edge_examples():
    f = Forest(3)
    f.add_edge(1, 3)
    assert f.edges == [(1, 3)]
    with pytest.raises(CycleError):
        Forest(3, [(1, 2), (2, 3)]).add_edge(1, 3)
    g = Forest(4, [(1, 2)])
    g.add_edge(3, 4)
    assert g.edges == [(1, 2), (3, 4)]
    with pytest.raises(IndexOutOfRange):
        g.add_edge(0, 1)


def test_tree_path_examples():
    f = Forest(3, [(1, 2), (2, 3)])
    assert [s.edge for s in f.tree_path(1, 3)] == [(1, 2), (2, 3)]
    assert f.tree_path(2, 2) == []
    d = DiForest(3, [(2, 1), (1, 3)])
    assert d.tree_path(2, 3) == [PathStep((2, 1), True), PathStep((1, 3), True)]
    assert d.tree_path(3, 2) == [PathStep((1, 3), False), PathStep((2, 1), False)]
    with pytest.raises(NotConnected):
        Forest(3, [(1, 2)]).tree_path(1, 3)


def test_directed_cycle_in_underlying_graph():
    d = DiForest(3, [(1, 2), (3, 2)])
    with pytest.raises(CycleError):
        d.add_edge(1, 3)
    with pytest.raises(CycleError):
        d.add_edge(2, 1)


def test_components_examples():
    assert Forest(5, [(2, 3), (3, 4), (4, 1), (5, 3)]).components() == [[1, 2, 3, 4, 5]]
    assert Forest(3).components() == [[1], [2], [3]]
    assert Forest(4, [(1, 2), (3, 4)]).components() == [[1, 2], [3, 4]]


def test_induced_relabels():
    f = Forest(5, [(2, 4), (4, 5), (1, 3)])
    sub = f.induced([2, 4, 5])
    assert sub.vertex_count == 3 and sub.edges == [(1, 2), (2, 3)]


def _random_forest_edges(n, rng):
    edges = []
    for v in range(2, n + 1):
        if rng.random() < 0.85:
            edges.append((rng.randint(1, v - 1), v))
    rng.shuffle(edges)
    return [(q, p) if rng.random() < 0.5 else (p, q) for p, q in edges]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.integers(0, 2**32 - 1))
def test_forest_invariant_edges_vs_components(n, seed):
    rng = random.Random(seed)
    f = Forest(n)
    for p, q in _random_forest_edges(n, rng):
        f.add_edge(p, q)
        assert len(f.edges) == n - len(f.components())
    comps = f.components()
    flat = [v for c in comps for v in c]
    assert sorted(flat) == list(range(1, n + 1))
    assert comps == sorted(comps, key=lambda c: c[0])


def test_resolve_examples():
    uf = LabeledUnionFind(3)
    assert uf.resolve(2) == (2, 1)
    uf.union(1, 2, 1j)
    root, f2 = uf.resolve(2)
    r1, f1 = uf.resolve(1)
    assert root == r1 and f2 / f1 == pytest.approx(1j)
    uf.union(2, 3, 1j)
    assert uf.resolve(3)[1] / uf.resolve(1)[1] == pytest.approx(-1)


def test_union_errors():
    uf = LabeledUnionFind(3)
    uf.union(1, 2, 1)
    with pytest.raises(AlreadyConnected):
        uf.union(2, 1, 1)
    with pytest.raises(BadRatio):
        uf.union(1, 3, 2.0)
    with pytest.raises(BadRatio):
        LabeledUnionFind(2, mode="scale").union(1, 2, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**32 - 1), st.sampled_from(["phase", "scale"]))
def test_union_find_matches_path_products(n, seed, mode):
    # oracle: walk the tree path and multiply edge ratios
    rng = random.Random(seed)
    uf = LabeledUnionFind(n, mode=mode)
    f = DiForest(n)
    ratio = {}
    for p, q in _random_forest_edges(n, rng):
        r = cmath.exp(2j * cmath.pi * rng.random())
        if mode == "scale":
            r *= 10 ** rng.uniform(-1, 1)
        uf.union(p, q, r)
        f.add_edge(p, q)
        ratio[(p, q)] = r
    for _ in range(30):
        p, q = rng.randint(1, n), rng.randint(1, n)
        if not f.connected(p, q):
            assert not uf.connected(p, q)
            continue
        expected = 1 + 0j
        for step in f.tree_path(p, q):
            expected *= ratio[step.edge] if step.forward else 1 / ratio[step.edge]
        got = uf.resolve(q)[1] / uf.resolve(p)[1]
        assert abs(got - expected) <= 1e-12 * abs(expected)
    if mode == "phase":
        assert np.allclose(np.abs(uf.factors()), 1, atol=1e-15)
