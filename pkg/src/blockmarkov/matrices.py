"""Matrix objects built from edge counts: frequency, transition, expected,
centered and rescaled matrices, and Hermitian dilations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ZeroRow
from .model import BlockModel, ClusterLayout, equilibrium_over_states


@dataclass(frozen=True)
class EdgeCounts:
    """Sparse directed-edge traversal counts ``N[i, j]``."""

    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.int64)
        m.sum_duplicates()
        if m.shape[0] != m.shape[1]:
            raise ValueError("edge counts must be square")
        if m.nnz and m.data.min() < 0:
            raise ValueError("edge counts must be nonnegative")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    def __getitem__(self, edge) -> int:
        i, j = edge
        return int(self.matrix[i, j])

    def dense(self) -> np.ndarray:
        return self.matrix.toarray().astype(float)

    def triplets(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    @classmethod
    def from_pairs(cls, src, dst, n: int) -> "EdgeCounts":
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        ones = np.ones(len(src), dtype=np.int64)
        return cls(sp.csr_matrix((ones, (src, dst)), shape=(n, n)))


@dataclass(frozen=True)
class BlockConstantMatrix:
    """An ``n x n`` matrix constant on every cluster block; stores only the K x K core."""

    layout: ClusterLayout
    values: np.ndarray

    def dense(self) -> np.ndarray:
        s = self.layout.sigma
        return self.values[np.ix_(s, s)]

    def total(self) -> float:
        sizes = self.layout.sizes
        return float(sizes @ self.values @ sizes)


def frequency_matrix(path) -> EdgeCounts:
    states = np.asarray(path.states)
    return EdgeCounts.from_pairs(states[:-1], states[1:], path.layout.n)


def row_sums(counts: EdgeCounts) -> np.ndarray:
    return np.asarray(counts.matrix.sum(axis=1)).ravel().astype(np.int64)


def transition_matrix(counts: EdgeCounts) -> sp.csr_matrix:
    """Row-normalized frequency matrix; raises ZeroRow on the first empty row."""
    d = row_sums(counts)
    empty = np.flatnonzero(d == 0)
    if empty.size:
        raise ZeroRow(int(empty[0]))
    return sp.csr_matrix(sp.diags(1.0 / d) @ counts.matrix.astype(float))


def expected_frequency(model: BlockModel, layout: ClusterLayout, ell: int) -> BlockConstantMatrix:
    """Mean of the frequency matrix for a path of ``ell`` steps started in equilibrium."""
    sizes = layout.sizes.astype(float)
    core = ell * (model.pi[:, None] * model.p) / np.outer(sizes, sizes)
    return BlockConstantMatrix(layout, core)


def centered(counts: EdgeCounts, expected: BlockConstantMatrix) -> np.ndarray:
    if counts.n != expected.layout.n:
        raise ValueError(f"dimension mismatch: counts n={counts.n}, layout n={expected.layout.n}")
    return counts.dense() - expected.dense()


def q_transform(M: np.ndarray, model: BlockModel, layout: ClusterLayout, ell: int) -> np.ndarray:
    """Scale row ``i`` of ``M`` by ``1 / ((ell + 1) * Pi(i))``."""
    Pi = equilibrium_over_states(model, layout)
    return np.asarray(M, dtype=float) / ((ell + 1) * Pi)[:, None]


def hermitian_dilation(M: np.ndarray) -> np.ndarray:
    """The symmetric ``2n x 2n`` matrix ``[[0, M], [M^T, 0]]``."""
    M = np.asarray(M, dtype=float)
    n, m = M.shape
    H = np.zeros((n + m, n + m))
    H[:n, n:] = M
    H[n:, :n] = M.T
    return H
