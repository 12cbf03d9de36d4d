import numpy as np
import pytest

from blockmarkov.model import BlockModel, build_layout
from blockmarkov.sampler import Equilibrium, sample_path
from blockmarkov.matrices import frequency_matrix

THREE_P = [[0.9, 0.1, 0.0], [0.0, 0.1, 0.9], [0.3, 0.7, 0.0]]
THREE_ALPHA = [0.5, 0.4, 0.1]
BULK_N = 1000
BULK_SEED = 2022


@pytest.fixture(scope="session")
def three_cluster():
    return BlockModel(THREE_P, THREE_ALPHA, 2.0)


def random_model(rng, K=None, lam=None):
    """Random irreducible aperiodic model: Dirichlet rows with a random sparsity
    mask, a positive diagonal and a positive cycle 0 -> 1 -> ... -> 0."""
    K = int(rng.integers(1, 5)) if K is None else K
    mask = rng.random((K, K)) < 0.6
    mask |= np.eye(K, dtype=bool)
    mask[np.arange(K), (np.arange(K) + 1) % K] = True
    p = rng.dirichlet(np.ones(K), size=K) * mask
    p /= p.sum(axis=1, keepdims=True)
    alpha = rng.dirichlet(np.full(K, 2.0))
    alpha = np.maximum(alpha, 0.05)
    alpha /= alpha.sum()
    alpha[-1] = 1.0 - alpha[:-1].sum()
    lam = float(rng.uniform(0.3, 4.0)) if lam is None else lam
    return BlockModel(p, alpha, lam)


@pytest.fixture(scope="session")
def bulk_run(three_cluster):
    """One equilibrium-start path at n=1000, ell=2n^2 and its frequency matrix."""
    layout = build_layout(three_cluster, BULK_N)
    ell = 2 * BULK_N**2
    path = sample_path(three_cluster, layout, ell, Equilibrium(), BULK_SEED)
    return {"model": three_cluster, "layout": layout, "ell": ell, "path": path,
            "counts": frequency_matrix(path), "n": BULK_N}
