import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockmarkov.errors import EmptyCluster, EmptyInput, ParseError, ZeroClusterRow
from blockmarkov.model import BlockModel, build_layout
from blockmarkov.pipeline import (TransitionDataset, estimate_parameters, path_dataset, preprocess,
                                  read_clustering, read_transitions, visit_counts)
from blockmarkov.sampler import Equilibrium, sample_path


def test_read_state_sequence(tmp_path):
    f = tmp_path / "seq.txt"
    f.write_text("a\nb\n\na\n")
    d = read_transitions(f, "state-sequence")
    assert d.n_states == 2 and d.labels == ("a", "b")
    np.testing.assert_array_equal(d.transitions, [[0, 1], [1, 0]])


def test_read_pairs(tmp_path):
    f = tmp_path / "pairs.csv"
    f.write_text("from,to\nx,y\ny,z\nz,x\n")
    d = read_transitions(f)
    assert d.ell == 3 and d.n_states == 3
    f.write_text("7,3\n3,3\n")
    d = read_transitions(f)
    assert d.labels == ("7", "3")
    np.testing.assert_array_equal(d.transitions, [[0, 1], [1, 1]])
    assert d.counts().total == 2


@pytest.mark.parametrize("text, fmt, line", [
    ("from,to\na,b\na,b,c\n", "csv-pairs", 3),
    ("a,b\n,b\n", "csv-pairs", 2),
    ("a\nb c\n", "state-sequence", 2),
    ("a\nb\nc,d\n", "state-sequence", 3),
])
def test_parse_errors_carry_line(tmp_path, text, fmt, line):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(ParseError) as err:
        read_transitions(f, fmt)
    assert err.value.line == line and f"line {line}" in str(err.value)


def test_empty_inputs(tmp_path):
    f = tmp_path / "e.csv"
    f.write_text("from,to\n")
    with pytest.raises(EmptyInput):
        read_transitions(f)
    f.write_text("only\n")
    with pytest.raises(EmptyInput):
        read_transitions(f, "state-sequence")
    with pytest.raises(ValueError):
        read_transitions(f, "parquet")


def dataset(pairs):
    t = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return TransitionDataset(int(t.max()) + 1, t, tuple(range(int(t.max()) + 1)))


def test_visit_counts_self_loop_once():
    np.testing.assert_array_equal(visit_counts(dataset([[0, 1], [1, 1], [1, 2]])), [1, 3, 1])


def test_preprocess_identity_and_filters():
    d = dataset([[0, 1], [1, 0], [1, 1], [2, 0]])
    same = preprocess(d)
    np.testing.assert_array_equal(same.transitions, d.transitions)
    assert same.n_states == d.n_states
    no_loops = preprocess(d, drop_self_loops=True)
    assert no_loops.ell == 3 and not np.any(no_loops.transitions[:, 0] == no_loops.transitions[:, 1])
    # state 2 has one visit; dropping it leaves 0 and 1
    trimmed = preprocess(d, min_visits=2)
    assert trimmed.n_states == 2 and trimmed.ell == 3
    with pytest.raises(EmptyInput):
        preprocess(dataset([[0, 0], [1, 1]]), drop_self_loops=True)
    with pytest.raises(ValueError):
        preprocess(d, min_visits=-1)


def test_preprocess_trims_iteratively():
    # removing state 3 drops state 2 below the threshold in turn
    d = dataset([[0, 1], [1, 0], [0, 1], [1, 0], [1, 2], [2, 3]])
    out = preprocess(d, min_visits=2)
    assert out.n_states == 2 and out.labels == (0, 1) and out.ell == 4


@settings(max_examples=80, deadline=None)
@given(pairs=st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=80),
       min_visits=st.integers(0, 6), drop=st.booleans())
def test_preprocess_idempotent(pairs, min_visits, drop):
    d = dataset(pairs)
    try:
        once = preprocess(d, min_visits, drop)
    except EmptyInput:
        return
    twice = preprocess(once, min_visits, drop)
    assert twice.n_states == once.n_states and twice.labels == once.labels
    np.testing.assert_array_equal(twice.transitions, once.transitions)
    if drop:
        assert not np.any(once.transitions[:, 0] == once.transitions[:, 1])
    assert visit_counts(once).min() >= min_visits


def test_taxi_scale_arithmetic():
    assert 55e6 / 4486**2 == pytest.approx(2.73, abs=0.005)
    # the estimator uses the same ell / n^2
    d = dataset([[0, 1], [1, 2], [2, 0], [0, 2], [2, 1]])
    assert estimate_parameters(d, [0, 0, 0]).lambda_hat == 5 / 9


def simulate_estimate(model, n, seed):
    layout = build_layout(model, n)
    path = sample_path(model, layout, 2 * n * n, Equilibrium(), seed)
    return estimate_parameters(path_dataset(path.states, n), layout.sigma), layout


def test_estimation_round_trip(three_cluster):
    est, layout = simulate_estimate(three_cluster, 500, 31)
    assert np.max(np.abs(est.p_hat - three_cluster.p)) < 0.02
    assert abs(est.lambda_hat - 2.0) < 1e-9
    assert np.max(np.abs(est.alpha_hat - three_cluster.alpha)) <= 1 / 500
    assert est.alpha_hat.sum() == 1.0
    np.testing.assert_allclose(est.p_hat.sum(axis=1), 1, atol=1e-9)
    assert abs(est.pi_hat.sum() - 1) < 1e-9
    model = est.to_model()
    assert np.max(np.abs(model.pi - three_cluster.pi)) < 0.02
    assert est.to_dict()["K"] == 3


def test_estimation_errors_shrink_with_n(three_cluster):
    def err(n):
        return np.mean([np.max(np.abs(simulate_estimate(three_cluster, n, s)[0].p_hat - three_cluster.p))
                        for s in range(3)])
    assert err(500) < err(200)


def test_single_cluster_estimate():
    est = estimate_parameters(dataset([[0, 1], [1, 2], [2, 2]]), [0, 0, 0])
    np.testing.assert_array_equal(est.p_hat, [[1.0]])
    np.testing.assert_array_equal(est.pi_hat, [1.0])


def test_estimation_errors():
    d = dataset([[0, 1], [1, 0], [1, 2]])
    with pytest.raises(EmptyCluster) as err:
        estimate_parameters(d, [0, 0, 2])
    assert err.value.cluster == 1
    with pytest.raises(ZeroClusterRow) as err:
        estimate_parameters(d, [0, 0, 1])
    assert err.value.cluster == 1
    with pytest.raises(ValueError):
        estimate_parameters(d, [0, 1])


def test_read_clustering(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("state,cluster\n0,b\n1,a\n2,b\n")
    np.testing.assert_array_equal(read_clustering(f), [1, 0, 1])
    seq = tmp_path / "s.txt"
    seq.write_text("x\ny\nx\n")
    data = read_transitions(seq, "state-sequence")
    f.write_text("y,5\nx,2\nunused,9\n")
    np.testing.assert_array_equal(read_clustering(f, data), [0, 1])
    f.write_text("0,1\n7,1\n")
    with pytest.raises(ParseError):
        read_clustering(f)
