"""Block Markov chain model: cluster dynamics, state layout and derived rates.

States and clusters are 0-based throughout the Python API.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import RejectedModel

ROW_SUM_TOL = 1e-12
ALPHA_SUM_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def chain_period(p: np.ndarray) -> int:
    """Period of an irreducible chain, from BFS levels of its positive-entry digraph."""
    adj = np.asarray(p) > 0
    order, pred = breadth_first_order(adj.astype(np.int8), 0, directed=True)
    level = np.full(len(adj), -1)
    level[0] = 0
    for v in order[1:]:
        level[v] = level[pred[v]] + 1
    us, vs = np.nonzero(adj)
    diffs = level[us] + 1 - level[vs]
    return reduce(math.gcd, (int(abs(d)) for d in diffs), 0)


def check_irreducible_aperiodic(p: np.ndarray) -> None:
    adj = (np.asarray(p) > 0).astype(np.int8)
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if ncomp != 1:
        raise RejectedModel("p is reducible: its positive-entry digraph is not strongly connected")
    period = chain_period(p)
    if period != 1:
        raise RejectedModel(f"p is periodic with period {period}")


def stationary_distribution(p) -> np.ndarray:
    """Equilibrium distribution of an irreducible, aperiodic stochastic matrix.

    Solves ``pi (p - I) = 0`` together with ``sum(pi) = 1`` by a direct solve.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise RejectedModel(f"p must be square, got shape {p.shape}")
    check_irreducible_aperiodic(p)
    K = p.shape[0]
    A = (p - np.eye(K)).T
    A[-1, :] = 1.0
    b = np.zeros(K)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    if np.any(pi <= 0):
        raise RejectedModel("equilibrium distribution has non-positive entries")
    return pi / pi.sum()


@dataclass(frozen=True)
class BlockModel:
    """Cluster transition matrix ``p``, cluster fractions ``alpha`` and path-length
    coefficient ``lam`` (so that ``ell ~ lam * n**2``)."""

    p: np.ndarray
    alpha: np.ndarray
    lam: float
    pi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise RejectedModel(f"p must be a non-empty square matrix, got shape {p.shape}")
        K = p.shape[0]
        if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise RejectedModel("entries of p must lie in [0, 1]")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise RejectedModel("rows of p must sum to 1")
        if alpha.shape != (K,):
            raise RejectedModel(f"alpha must have length K={K}")
        if np.any(~(alpha > 0)):
            raise RejectedModel("alpha entries must be strictly positive")
        if abs(alpha.sum() - 1.0) > ALPHA_SUM_TOL:
            raise RejectedModel("alpha must sum to 1")
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise RejectedModel("lambda must be a positive real")
        pi = stationary_distribution(p)
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "alpha", _frozen(alpha))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "pi", _frozen(pi))

    @property
    def K(self) -> int:
        return self.p.shape[0]

    def to_dict(self) -> dict:
        return {"K": self.K, "p": self.p.tolist(), "alpha": self.alpha.tolist(), "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict) -> "BlockModel":
        missing = [k for k in ("K", "p", "alpha", "lambda") if k not in d]
        if missing:
            raise RejectedModel(f"model is missing key(s): {', '.join(missing)}")
        try:
            p = np.array(d["p"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise RejectedModel(f"p is not a numeric matrix: {exc}") from None
        if p.shape != (int(d["K"]), int(d["K"])):
            raise RejectedModel(f"p has shape {p.shape}, expected K x K with K={d['K']}")
        return cls(p=p, alpha=d["alpha"], lam=d["lambda"])

    @classmethod
    def load(cls, path) -> "BlockModel":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise RejectedModel(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class ClusterLayout:
    """Partition of ``n`` states into contiguous cluster blocks."""

    sizes: np.ndarray
    sigma: np.ndarray = field(init=False, repr=False, compare=False)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 1):
            raise RejectedModel("every cluster must be nonempty")
        object.__setattr__(self, "sizes", _frozen(sizes, np.int64))
        object.__setattr__(self, "offsets", _frozen(np.concatenate([[0], np.cumsum(sizes)]), np.int64))
        object.__setattr__(self, "sigma", _frozen(np.repeat(np.arange(sizes.size), sizes), np.int64))

    @property
    def n(self) -> int:
        return int(self.offsets[-1])

    @property
    def K(self) -> int:
        return self.sizes.size

    def states_of(self, k: int) -> range:
        return range(int(self.offsets[k]), int(self.offsets[k + 1]))


def build_layout(model: BlockModel, n: int) -> ClusterLayout:
    """Cluster sizes by largest-remainder rounding of ``alpha * n``.

    Ties in the fractional parts go to the lower cluster index. Empty clusters
    then take one state each from the currently largest cluster.
    """
    K = model.K
    if n < K:
        raise RejectedModel(f"n={n} is smaller than the number of clusters K={K}")
    target = model.alpha * n
    sizes = np.floor(target).astype(np.int64)
    remainder = n - int(sizes.sum())
    frac = target - sizes
    order = sorted(range(K), key=lambda k: (-frac[k], k))
    for k in order[:remainder]:
        sizes[k] += 1
    for k in range(K):
        if sizes[k] == 0:
            donor = int(np.argmax(sizes))
            sizes[donor] -= 1
            sizes[k] = 1
    return ClusterLayout(sizes)


def edge_rate(model: BlockModel, k1: int, k2: int) -> float:
    """Limiting Poisson rate of the traversal count of an edge in cluster block (k1, k2)."""
    return model.lam * model.pi[k1] * model.p[k1, k2] / (model.alpha[k1] * model.alpha[k2])


def equilibrium_over_states(model: BlockModel, layout: ClusterLayout) -> np.ndarray:
    """Exact equilibrium distribution over states, ``pi[sigma(v)] / size[sigma(v)]``."""
    return (model.pi / layout.sizes)[layout.sigma]
