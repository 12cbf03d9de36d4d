"""Singular value spectra, empirical distributions and distances between them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import NumericalFailure
from .matrices import hermitian_dilation

CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray  # descending
    n: int
    scale: float = 1.0


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Uniformly weighted point masses, stored sorted ascending."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        if pts.size == 0:
            raise ValueError("empirical distribution needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def cdf(self, x):
        return np.searchsorted(self.points, x, side="right") / self.size


def _clamp(values: np.ndarray) -> np.ndarray:
    if values.size and values.min() < -CLAMP_TOL * max(1.0, values.max()):
        raise NumericalFailure(f"singular value {values.min():.3e} is negative beyond tolerance")
    return np.clip(values, 0.0, None)


def singular_values(M, method: str = "dilation") -> SingularSpectrum:
    """All singular values of a square matrix, sorted descending.

    ``method="dilation"`` takes the nonnegative half of the spectrum of the
    Hermitian dilation (one symmetric eigensolve); ``method="svd"`` calls a
    direct SVD.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    n = M.shape[0]
    try:
        if method == "dilation":
            ev = scipy.linalg.eigvalsh(hermitian_dilation(M), check_finite=False)
            vals = ev[n:][::-1]
        elif method == "svd":
            vals = scipy.linalg.svd(M, compute_uv=False, check_finite=False)
        else:
            raise ValueError(f"unknown method {method!r}")
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return SingularSpectrum(values=_clamp(np.sort(vals)[::-1]), n=n)


def esd_scaled(spectrum, scale: float) -> EmpiricalDistribution:
    """Empirical distribution of the singular values divided by ``scale``.

    Accepts a SingularSpectrum or a square matrix.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not isinstance(spectrum, SingularSpectrum):
        spectrum = singular_values(spectrum)
    return EmpiricalDistribution(spectrum.values / scale)


def trim_top(dist: EmpiricalDistribution, k: int) -> EmpiricalDistribution:
    if not 0 <= k < dist.size:
        raise ValueError(f"cannot trim {k} of {dist.size} points")
    return EmpiricalDistribution(dist.points[: dist.size - k])


def ks_distance(dist: EmpiricalDistribution, cdf: Callable) -> float:
    """Sup-distance between the empirical CDF and ``cdf``.

    Both one-sided limits are compared at every sample point; the left limit of
    ``cdf`` is taken at the next float below the point.
    """
    x = np.unique(dist.points)
    f_right = dist.cdf(x)
    f_left = np.searchsorted(dist.points, x, side="left") / dist.size
    g_right = np.asarray(cdf(x), dtype=float)
    g_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(f_right - g_right)), np.max(np.abs(f_left - g_left))))


def ks_two_sample(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    x = np.union1d(a.points, b.points)
    return float(np.max(np.abs(a.cdf(x) - b.cdf(x))))


def histogram(dist: EmpiricalDistribution, edges) -> list[tuple[tuple[float, float], float]]:
    """Mass per bin; bins are half-open except the last, which is closed."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    counts, _ = np.histogram(dist.points, bins=edges)
    mass = counts / dist.size
    return [((float(lo), float(hi)), float(m)) for lo, hi, m in zip(edges[:-1], edges[1:], mass)]
