"""Poisson behaviour of single-edge traversal counts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import CapExceeded
from .model import BlockModel, ClusterLayout, edge_rate
from .sampler import replicate_edge_count

DEFAULT_EPSILON = 1e-4
DEFAULT_CAP = 10_000


def poisson_pmf(rate, k):
    rate = np.asarray(rate, dtype=float)
    k = np.asarray(k, dtype=float)
    out = np.exp(xlogy(k, rate) - rate - gammaln(k + 1))
    return float(out) if out.ndim == 0 else out


def _frequencies(hist) -> np.ndarray:
    """Relative frequencies indexed by value, from a value->count mapping or a bincount array."""
    if isinstance(hist, Mapping):
        if not hist:
            raise ValueError("histogram is empty")
        if min(hist) < 0:
            raise ValueError("histogram values must be nonnegative integers")
        counts = np.zeros(max(hist) + 1)
        for v, c in hist.items():
            counts[int(v)] += c
    else:
        counts = np.asarray(hist, dtype=float)
    total = counts.sum()
    if counts.size == 0 or total <= 0:
        raise ValueError("histogram is empty")
    return counts / total


def tv_distance(hist, rate: float) -> float:
    """Total variation distance between a histogram and Poisson(rate).

    Poisson mass beyond the largest histogram value counts fully as mismatch.
    """
    f = _frequencies(hist)
    pmf = poisson_pmf(rate, np.arange(f.size))
    tail = max(0.0, 1.0 - float(np.sum(pmf)))
    return float(0.5 * (np.sum(np.abs(f - pmf)) + tail))


def tv_standard_error(hist, replicas: int) -> float:
    """First-order Monte Carlo standard error of an empirical TV distance,
    half the sum of the per-value binomial standard errors."""
    f = _frequencies(hist)
    return float(0.5 * np.sum(np.sqrt(f * (1 - f) / replicas)))


def relative_pointwise_distance(p, pi, r: int) -> float:
    """max over (x, y) of |P^r[x, y] - pi[y]| / pi[y]."""
    if r < 1:
        raise ValueError("r must be at least 1")
    p = np.asarray(p, dtype=float)
    pi = np.asarray(pi, dtype=float)
    Pr = np.linalg.matrix_power(p, r)
    return float(np.max(np.abs(Pr - pi[None, :]) / pi[None, :]))


def relative_pointwise_profile(p, pi, rmax: int) -> np.ndarray:
    """Delta(1), ..., Delta(rmax) by repeated multiplication."""
    p = np.asarray(p, dtype=float)
    pi = np.asarray(pi, dtype=float)
    out = np.empty(rmax)
    Pr = np.eye(p.shape[0])
    for r in range(rmax):
        Pr = Pr @ p
        out[r] = np.max(np.abs(Pr - pi[None, :]) / pi[None, :])
    return out


def mixing_horizon(p, pi, epsilon: float, cap: int = DEFAULT_CAP) -> int:
    """Smallest r0 with Delta(r) <= epsilon for every r in [r0, cap].

    The profile is computed until Delta stays below epsilon / 1000 or reaches
    the cap; beyond that point geometric decay keeps it below epsilon.
    """
    p = np.asarray(p, dtype=float)
    pi = np.asarray(pi, dtype=float)
    Pr = np.eye(p.shape[0])
    last_above = 0
    for r in range(1, cap + 1):
        Pr = Pr @ p
        d = np.max(np.abs(Pr - pi[None, :]) / pi[None, :])
        if d > epsilon:
            last_above = r
        elif d <= epsilon * 1e-3:
            return last_above + 1
    if last_above >= cap:
        raise CapExceeded(f"Delta(r) > {epsilon} for all r <= {cap}")
    return last_above + 1


@dataclass(frozen=True)
class PoissonCertificate:
    epsilon: float
    r0: int
    bound: float
    self_loop: bool
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def poisson_certificate(model: BlockModel, layout: ClusterLayout, ell: int, k1: int, k2: int,
                        self_loop: bool = False, epsilon: float = DEFAULT_EPSILON,
                        cap: int = DEFAULT_CAP) -> PoissonCertificate:
    """Nonasymptotic upper bound on the TV distance between the count of one edge
    in cluster block (k1, k2) and its Poisson approximation, equilibrium start."""
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    if model.p[k1, k2] <= 0:
        raise ValueError(f"p[{k1}, {k2}] must be positive")
    if self_loop and k1 != k2:
        raise ValueError("a self-loop lies in a diagonal cluster block")
    r0 = mixing_horizon(model.p, model.pi, epsilon, cap)
    v1, v2 = float(layout.sizes[k1]), float(layout.sizes[k2])
    scale = ell * model.pi[k1] * model.p[k1, k2]
    terms = {
        "local": scale * (4 * r0 - 1) / (v1**2 * v2**2),
        "long_range": scale * 12 * epsilon / (v1 * v2),
        "self_loop": scale * 2 / v1**3 if self_loop else 0.0,
    }
    return PoissonCertificate(epsilon, r0, float(sum(terms.values())), self_loop, terms)


@dataclass(frozen=True)
class TVReport:
    edge: tuple
    clusters: tuple
    rate: float
    histogram: dict
    tv: float
    tv_se: float
    replicas: int
    mean: float
    variance: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = {str(k): v for k, v in self.histogram.items()}
        return d


def poisson_check(model: BlockModel, layout: ClusterLayout, ell: int, edge, replicas: int,
                  seed: int, workers: int = 1) -> TVReport:
    i, j = (int(v) for v in edge)
    k1, k2 = int(layout.sigma[i]), int(layout.sigma[j])
    if model.p[k1, k2] <= 0:
        raise ValueError(f"edge {edge} lies in cluster block ({k1}, {k2}) with zero probability")
    counts = replicate_edge_count(model, layout, ell, (i, j), replicas, seed, workers)
    binned = np.bincount(counts)
    rate = edge_rate(model, k1, k2)
    return TVReport(
        edge=(i, j),
        clusters=(k1, k2),
        rate=float(rate),
        histogram={int(v): int(c) for v, c in enumerate(binned) if c},
        tv=tv_distance(binned, rate),
        tv_se=tv_standard_error(binned, replicas),
        replicas=int(replicas),
        mean=float(counts.mean()),
        variance=float(counts.var(ddof=1)) if replicas > 1 else 0.0,
    )
