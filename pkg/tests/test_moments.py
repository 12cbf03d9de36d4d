import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockmarkov.errors import ResourceLimit
from blockmarkov.limitlaw import StepGraphon, graphon_wm, graphon_wq, law_density
from blockmarkov.model import BlockModel
from blockmarkov.moments import (MomentSequence, OrderedTree, catalan, enumerate_ordered_trees,
                                 hankel_psd, hom_density, quadrature_moments, tree_moments)

from conftest import random_model


def single(lam):
    return graphon_wm(BlockModel([[1.0]], [1.0], lam))


@pytest.mark.parametrize("m, count", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14), (5, 42), (6, 132), (7, 429), (8, 1430)])
def test_tree_counts_are_catalan(m, count):
    trees = enumerate_ordered_trees(m)
    assert len(trees) == count == catalan(m)
    assert len({t.parents for t in trees}) == count
    for t in trees:
        assert t.vertices == m + 1
        assert all(p < v for v, p in enumerate(t.parents) if v)


def test_tree_enumeration_limits():
    with pytest.raises(ResourceLimit):
        enumerate_ordered_trees(13)
    with pytest.raises(ValueError):
        enumerate_ordered_trees(-1)


def test_from_dyck():
    assert OrderedTree.from_dyck("()()").parents == (-1, 0, 0)
    assert OrderedTree.from_dyck("(())").parents == (-1, 0, 1)


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("method", ["tree", "labelings"])
def test_hom_density_examples(lam, method):
    g = single(lam)
    edge = OrderedTree((-1, 0))
    path = OrderedTree((-1, 0, 1))
    assert hom_density(edge, g, method) == pytest.approx(lam, rel=1e-14)
    assert hom_density(path, g, method) == pytest.approx(lam**2, rel=1e-14)
    zero = StepGraphon([0, 0.4, 1], np.zeros((2, 2)))
    assert hom_density(path, zero, method) == 0.0


def test_hom_density_unknown_method_and_budget(three_cluster):
    t = enumerate_ordered_trees(5)[0]
    with pytest.raises(ValueError):
        hom_density(t, single(1.0), method="mc")
    with pytest.raises(ResourceLimit):
        hom_density(t, graphon_wm(three_cluster), method="labelings", budget=1000)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 5))
def test_message_passing_matches_labeling_sum(seed, m):
    rng = np.random.default_rng(seed)
    B = int(rng.integers(1, 5))
    w = rng.dirichlet(np.ones(B))
    b = np.concatenate([[0], np.cumsum(w)])
    b[-1] = 1.0
    V = rng.random((B, B))
    g = StepGraphon(b, V + V.T)
    for t in enumerate_ordered_trees(m):
        assert hom_density(t, g, "tree") == pytest.approx(hom_density(t, g, "labelings"), rel=1e-12)


def test_hom_density_relabeling_invariance(three_cluster):
    g = graphon_wq(three_cluster)
    # the same rooted ordered tree in depth-first and breadth-first labelings
    dfs = OrderedTree((-1, 0, 1, 1, 0, 4))
    bfs = OrderedTree((-1, 0, 0, 1, 1, 2))
    mirror = OrderedTree((-1, 0, 1, 0, 3, 3))
    ref = hom_density(dfs, g, "labelings")
    for t in (dfs, bfs, mirror):
        assert hom_density(t, g, "tree") == pytest.approx(ref, rel=1e-13)
        assert hom_density(t, g, "labelings") == pytest.approx(ref, rel=1e-13)


def test_tree_moments_single_cluster():
    m1 = tree_moments(single(1.0), 3)
    np.testing.assert_allclose(m1.values, [1, 0, 1, 0, 2, 0, 5], rtol=1e-13)
    m2 = tree_moments(single(2.0), 3)
    np.testing.assert_allclose(m2.values, [1, 0, 2, 0, 8, 0, 40], rtol=1e-13)
    assert m2[1] == m2[3] == m2[5] == 0.0
    assert m1.provenance == "tree-sum"
    assert m1.to_dict()["4"] == pytest.approx(2.0)


@pytest.mark.parametrize("target", ["N", "P"])
def test_tree_and_quadrature_moments_agree(three_cluster, target):
    g = graphon_wm(three_cluster) if target == "N" else graphon_wq(three_cluster)
    tm = tree_moments(g, 4)
    qm = quadrature_moments(law_density(three_cluster, target), 4)
    for k in range(0, 9, 2):
        assert abs(tm[k] - qm[k]) <= max(0.01, 0.02 * abs(tm[k]))
    assert np.all(np.abs(qm.values[1::2]) < 1e-6)


def test_quadrature_single_cluster():
    d = law_density(BlockModel([[1.0]], [1.0], 1.0), "N")
    q = quadrature_moments(d, 2)
    assert abs(q[0] - 1) < 0.02
    assert abs(q[2] - 1) < 0.01
    assert abs(q[1]) < 1e-6 and abs(q[3]) < 1e-6
    with pytest.raises(ValueError):
        quadrature_moments(d.fold(), 2)


def test_hankel_examples():
    semicircle = [1, 0, 1, 0, 2]
    check = hankel_psd(semicircle, 2)
    assert check.psd
    assert check.min_eigenvalue == pytest.approx(np.linalg.eigvalsh([[1, 0, 1], [0, 1, 0], [1, 0, 2]])[0])
    assert not hankel_psd([1, 0, -1], 1).psd
    assert hankel_psd([1], 0).psd
    with pytest.raises(ValueError):
        hankel_psd([1, 0, 1], 2)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tree_moments_are_hankel_psd(seed):
    m = random_model(np.random.default_rng(seed))
    for g in (graphon_wm(m), graphon_wq(m)):
        mom = tree_moments(g, 4)
        # scale-free check: normalize by the variance to keep the Hankel matrix well conditioned
        v = mom[2]
        scaled = MomentSequence(mom.values / v ** (np.arange(9) / 2), mom.provenance)
        for k in range(5):
            assert hankel_psd(scaled, k).psd
