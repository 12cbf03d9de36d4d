from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from blockmarkov import sampler
from blockmarkov.matrices import frequency_matrix
from blockmarkov.model import BlockModel, ClusterLayout, build_layout, edge_rate, equilibrium_over_states
from blockmarkov.sampler import (ClusterMass, Equilibrium, PointMass, UniformState, iter_path_chunks,
                                 replica_seed, replicate_edge_count, sample_path, stream_edge_counts)

from conftest import random_model


def batch_means_se(x, batches=50):
    b = np.asarray(x[: len(x) // batches * batches], float).reshape(batches, -1).mean(axis=1)
    return b.std(ddof=1) / np.sqrt(batches)


@pytest.mark.parametrize("init", [Equilibrium(), UniformState(), PointMass(3), ClusterMass(2)])
def test_same_seed_same_path(three_cluster, init):
    lay = build_layout(three_cluster, 50)
    a = sample_path(three_cluster, lay, 5000, init, seed=9).states
    b = sample_path(three_cluster, lay, 5000, init, seed=9).states
    np.testing.assert_array_equal(a, b)
    assert len(a) == 5001
    assert not np.array_equal(a, sample_path(three_cluster, lay, 5000, init, seed=10).states)


def test_initial_distributions_respected(three_cluster):
    lay = build_layout(three_cluster, 50)
    assert sample_path(three_cluster, lay, 3, PointMass(7), 1).states[0] == 7
    for s in range(20):
        assert lay.sigma[sample_path(three_cluster, lay, 3, ClusterMass(2), s).states[0]] == 2
    with pytest.raises(ValueError):
        sample_path(three_cluster, lay, 3, PointMass(50), 1)
    with pytest.raises(ValueError):
        sample_path(three_cluster, lay, 3, ClusterMass(3), 1)
    with pytest.raises(ValueError):
        sample_path(three_cluster, lay, 0, Equilibrium(), 1)


def test_transitions_respect_support(three_cluster):
    lay = build_layout(three_cluster, 30)
    x = sample_path(three_cluster, lay, 100_000, Equilibrium(), 4).states
    assert np.all(three_cluster.p[lay.sigma[x[:-1]], lay.sigma[x[1:]]] > 0)


def test_single_cluster_draws_are_uniform_and_independent():
    m = BlockModel([[1.0]], [1.0], 1.0)
    n = 7
    x = sample_path(m, build_layout(m, n), 200_000, PointMass(0), 3).states[1:]
    assert stats.chisquare(np.bincount(x, minlength=n)).pvalue > 1e-3
    pairs = np.bincount(x[:-1] * n + x[1:], minlength=n * n)
    assert stats.chisquare(pairs).pvalue > 1e-3


def test_three_cluster_cluster_frequencies_match_equilibrium(three_cluster):
    lay = build_layout(three_cluster, 100)
    c = lay.sigma[sample_path(three_cluster, lay, 10**6, Equilibrium(), 2024).states]
    for k in range(3):
        ind = (c == k).astype(float)
        assert abs(ind.mean() - three_cluster.pi[k]) < 4 * batch_means_se(ind)


def test_next_cluster_follows_row_of_p(three_cluster):
    lay = build_layout(three_cluster, 40)
    c = lay.sigma[sample_path(three_cluster, lay, 400_000, Equilibrium(), 5).states]
    for k in range(3):
        nxt = c[1:][c[:-1] == k]
        freq = np.bincount(nxt, minlength=3) / nxt.size
        se = np.sqrt(three_cluster.p[k] * (1 - three_cluster.p[k]) / nxt.size)
        assert np.all(np.abs(freq - three_cluster.p[k]) <= 5 * se + 1e-12)


def test_equilibrium_start_marginal():
    m = BlockModel([[0.2, 0.8], [0.6, 0.4]], [0.7, 0.3], 1.0)
    lay = build_layout(m, 5)
    Pi = equilibrium_over_states(m, lay)
    reps = 20_000
    x0 = [sample_path(m, lay, 1, Equilibrium(), replica_seed(77, r)).states[0] for r in range(reps)]
    obs = np.bincount(x0, minlength=5)
    assert stats.chisquare(obs, Pi * reps).pvalue > 1e-3


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), ell=st.integers(1, 3000), n_extra=st.integers(0, 40))
def test_stream_counts_equal_materialized_counts(seed, ell, n_extra):
    m = random_model(np.random.default_rng(seed))
    lay = build_layout(m, m.K + n_extra)
    streamed = stream_edge_counts(m, lay, ell, Equilibrium(), seed)
    direct = frequency_matrix(sample_path(m, lay, ell, Equilibrium(), seed))
    assert (streamed.matrix != direct.matrix).nnz == 0
    assert streamed.total == ell


def test_stream_counts_across_chunk_boundaries(three_cluster, monkeypatch):
    monkeypatch.setattr(sampler, "CHUNK", 7)
    lay = build_layout(three_cluster, 12)
    path = sample_path(three_cluster, lay, 100, Equilibrium(), 8)
    chunks = list(iter_path_chunks(three_cluster, lay, 100, Equilibrium(), 8))
    assert len(chunks) == 15
    streamed = stream_edge_counts(three_cluster, lay, 100, Equilibrium(), 8)
    assert (streamed.matrix != frequency_matrix(path).matrix).nnz == 0
    assert streamed.total == 100
    i, j = path.states[6], path.states[7]  # pair straddling the first boundary
    assert sampler._edge_count(three_cluster, lay, 100, (i, j), 8) == streamed[i, j]


def test_forced_two_state_cycle():
    # the deterministic cycle is periodic, so it is built as a bare parameter
    # object rather than a validated model
    p = np.array([[0.0, 1.0], [1.0, 0.0]])
    stub = SimpleNamespace(p=p, K=2, pi=np.array([0.5, 0.5]))
    counts = stream_edge_counts(stub, ClusterLayout([1, 1]), 4, PointMass(0), 0)
    assert counts[0, 1] == 2 and counts[1, 0] == 2 and counts.total == 4


def test_replicate_single_replica_is_stream_lookup(three_cluster):
    lay = build_layout(three_cluster, 30)
    edge = (0, 16)
    [c] = replicate_edge_count(three_cluster, lay, 1800, edge, 1, seed=13)
    ref = stream_edge_counts(three_cluster, lay, 1800, Equilibrium(), replica_seed(13, 0))
    assert c == ref[edge]


def test_replicate_order_independent(three_cluster):
    lay = build_layout(three_cluster, 20)
    a = replicate_edge_count(three_cluster, lay, 800, (0, 1), 40, seed=21)
    b = replicate_edge_count(three_cluster, lay, 800, (0, 1), 40, seed=21, workers=2)
    np.testing.assert_array_equal(a, b)
    # each replica depends on its own index only
    perm = np.random.default_rng(0).permutation(40)
    c = [sampler._edge_count(three_cluster, lay, 800, (0, 1), replica_seed(21, r)) for r in perm]
    np.testing.assert_array_equal(sorted(c), sorted(a))
    assert len(set(replica_seed(21, r) for r in range(1000))) == 1000


def test_replicate_mean_matches_edge_rate(three_cluster):
    n = 200
    lay = build_layout(three_cluster, n)
    counts = replicate_edge_count(three_cluster, lay, 2 * n * n, (0, 100), 2000, seed=7)
    rate = edge_rate(three_cluster, 0, 1)
    se = counts.std(ddof=1) / np.sqrt(counts.size)
    assert abs(counts.mean() - rate) < 5 * se
    with pytest.raises(ValueError):
        replicate_edge_count(three_cluster, lay, 10, (0, 1), 0, seed=1)
