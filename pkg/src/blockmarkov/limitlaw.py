"""Limiting singular value laws from self-consistent resolvent equations.

For a step graphon with blocks of widths ``w_b`` and values ``W[b, c]`` the
block-constant resolvent ``a_b(z)`` solves

    1 / a_b = z - sum_c w_c W[b, c] a_c,        s(z) = sum_b w_b a_b,

and ``s`` is the Stieltjes transform of the symmetrized singular value law.
Every solver below reduces to a coupling matrix ``C`` and aggregation weights
``u`` with ``1 / a = z - C a`` and ``s = u . a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence
from .model import BlockModel

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
DEFAULT_DAMPING = 0.5
SIGN_TOL = 1e-14


@dataclass(frozen=True)
class StepGraphon:
    boundaries: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        v = np.asarray(self.values, dtype=float)
        B = b.size - 1
        if B < 1 or b[0] != 0.0 or abs(b[-1] - 1.0) > 1e-12 or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must increase strictly from 0 to 1")
        if v.shape != (B, B) or not np.all(np.isfinite(v)):
            raise ValueError(f"values must be a finite {B}x{B} matrix")
        if not np.array_equal(v, v.T):
            raise ValueError("graphon values must be symmetric")
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "values", v)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def blocks(self) -> int:
        return self.values.shape[0]

    def __call__(self, x, y):
        i = np.clip(np.searchsorted(self.boundaries, x, side="right") - 1, 0, self.blocks - 1)
        j = np.clip(np.searchsorted(self.boundaries, y, side="right") - 1, 0, self.blocks - 1)
        return self.values[i, j]


def _bipartite_graphon(model: BlockModel, forward: np.ndarray, backward: np.ndarray) -> StepGraphon:
    """Assemble the 2K-block graphon: block (i, K+j) = forward[i, j],
    block (K+i, j) = backward[i, j], zero diagonal quadrants."""
    K = model.K
    c = np.concatenate([[0.0], np.cumsum(model.alpha)])
    c[-1] = 1.0
    boundaries = np.concatenate([c[:-1] / 2, 0.5 + c / 2])
    values = np.zeros((2 * K, 2 * K))
    values[:K, K:] = forward
    values[K:, :K] = backward
    # forward and backward are transposes of each other analytically; remove rounding asymmetry
    values = (values + values.T) / 2
    return StepGraphon(boundaries, values)


def graphon_wm(model: BlockModel) -> StepGraphon:
    """Limiting variance profile of the scaled dilation of the centered frequency matrix."""
    lam, pi, p, al = model.lam, model.pi, model.p, model.alpha
    fwd = 2 * lam * pi[:, None] * p / np.outer(al, al)
    bwd = 2 * lam * (pi[:, None] * p).T / np.outer(al, al)
    return _bipartite_graphon(model, fwd, bwd)


def graphon_wq(model: BlockModel) -> StepGraphon:
    """Limiting variance profile of the scaled dilation of the rescaled transition fluctuations."""
    lam, pi, p, al = model.lam, model.pi, model.p, model.alpha
    fwd = 2 / lam * (al / pi)[:, None] * p / al[None, :]
    bwd = 2 / lam * ((p / pi[:, None]) * al[:, None]).T / al[:, None]
    return _bipartite_graphon(model, fwd, bwd)


@dataclass(frozen=True)
class ResolventSolution:
    z: complex
    a: np.ndarray
    s: complex
    residual: float
    iterations: int


@dataclass
class GridSolution:
    z: np.ndarray
    a: np.ndarray  # (B, G)
    s: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    failed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _iterate(C, z, a0, tol, max_iter, damping):
    """Damped fixed-point iteration, vectorized over the columns of ``a0``.

    A point whose iterate leaves the lower half plane restarts from 1/z with
    its damping halved.
    """
    a = a0.copy()
    G = z.size
    d = np.full(G, float(damping))
    res = np.full(G, np.inf)
    iters = np.zeros(G, dtype=np.int64)
    active = np.arange(G)
    for _ in range(max_iter):
        if active.size == 0:
            break
        za = z[active]
        aa = a[:, active]
        den = za[None, :] - C @ aa
        r = np.max(np.abs(aa * den - 1.0), axis=0)
        res[active] = r
        done = r < tol
        keep = ~done
        active, aa, den, za = active[keep], aa[:, keep], den[:, keep], za[keep]
        if active.size == 0:
            break
        da = d[active]
        aa = (1.0 - da) * aa + da / den
        iters[active] += 1
        bad = np.any(aa.imag > SIGN_TOL, axis=0)
        if np.any(bad):
            d[active[bad]] /= 2
            aa[:, bad] = 1.0 / za[bad]
        a[:, active] = aa
    failed = np.flatnonzero(~(res < tol))
    return a, res, iters, failed


@dataclass(frozen=True)
class ResolventSystem:
    """``1 / a = z - coupling @ a`` with ``s = weights . a``."""

    coupling: np.ndarray
    weights: np.ndarray
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")

    @classmethod
    def from_graphon(cls, graphon: StepGraphon, **kw) -> "ResolventSystem":
        w = graphon.widths
        return cls(graphon.values * w[None, :], w, **kw)

    def support_bound(self) -> float:
        """Upper bound 2 sqrt(max row sum of the coupling) on the support radius."""
        return 2.0 * float(np.sqrt(np.max(self.coupling.sum(axis=1))))

    def solve_many(self, z, a0=None, raise_on_failure=True) -> GridSolution:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(z.imag <= 0):
            raise ValueError("z must lie in the upper half plane")
        B = self.coupling.shape[0]
        if a0 is None:
            a0 = np.broadcast_to(1.0 / z, (B, z.size)).astype(complex)
        a, res, iters, failed = _iterate(self.coupling, z, np.asarray(a0, complex),
                                         self.tol, self.max_iter, self.damping)
        if failed.size and raise_on_failure:
            raise NoConvergence(float(np.max(res[failed])), int(np.max(iters[failed])), failed)
        return GridSolution(z=z, a=a, s=self.weights @ a, residual=res, iterations=iters, failed=failed)

    def solve(self, z: complex, a0=None) -> ResolventSolution:
        a0 = None if a0 is None else np.asarray(a0, complex).reshape(-1, 1)
        g = self.solve_many([z], a0=a0)
        return ResolventSolution(z=complex(z), a=g.a[:, 0].copy(), s=complex(g.s[0]),
                                 residual=float(g.residual[0]), iterations=int(g.iterations[0]))

    def sweep(self, z) -> GridSolution:
        """Solve point by point, warm-starting each point from its predecessor."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        B = self.coupling.shape[0]
        a = np.empty((B, z.size), complex)
        res = np.empty(z.size)
        iters = np.empty(z.size, dtype=np.int64)
        failed = []
        prev = None
        for g, zg in enumerate(z):
            sol = self.solve_many([zg], a0=None if prev is None else prev[:, None],
                                  raise_on_failure=False)
            a[:, g], res[g], iters[g] = sol.a[:, 0], sol.residual[0], sol.iterations[0]
            if sol.failed.size:
                failed.append(g)
                prev = None
            else:
                prev = sol.a[:, 0]
        if failed:
            raise NoConvergence(float(np.max(res[failed])), int(np.max(iters[failed])), failed)
        return GridSolution(z=z, a=a, s=self.weights @ a, residual=res, iterations=iters)

    def __call__(self, z):
        return self.solve_many(z).s


def frequency_law_system(model: BlockModel, **kw) -> ResolventSystem:
    """Coupled 2K-equation system for the law of the frequency matrix over sqrt(n), written directly
    in the model parameters (no graphon)."""
    K, lam, pi, p, al = model.K, model.lam, model.pi, model.p, model.alpha
    C = np.zeros((2 * K, 2 * K))
    C[:K, K:] = lam * (pi / al)[:, None] * p
    C[K:, :K] = lam * (pi[:, None] * p).T / al[:, None]
    return ResolventSystem(C, np.concatenate([al, al]) / 2, **kw)


def transition_law_system(model: BlockModel, **kw) -> ResolventSystem:
    """As frequency_law_system, for the law of sqrt(n) times the empirical transition matrix."""
    K, lam, pi, p, al = model.K, model.lam, model.pi, model.p, model.alpha
    C = np.zeros((2 * K, 2 * K))
    C[:K, K:] = (al / (lam * pi))[:, None] * p
    C[K:, :K] = ((al**2 / (lam * pi))[:, None] * p).T / al[:, None]
    return ResolventSystem(C, np.concatenate([al, al]) / 2, **kw)


def law_system(model: BlockModel, target: str, **kw) -> ResolventSystem:
    target = target.upper()
    if target == "N":
        return frequency_law_system(model, **kw)
    if target == "P":
        return transition_law_system(model, **kw)
    raise ValueError(f"target must be 'N' or 'P', got {target!r}")


def _solver_kw(tol, max_iter, damping):
    return dict(tol=tol, max_iter=max_iter, damping=damping)


def solve_resolvent(graphon: StepGraphon, z: complex, tol=DEFAULT_TOL,
                    max_iter=DEFAULT_MAX_ITER, damping=DEFAULT_DAMPING) -> ResolventSolution:
    return ResolventSystem.from_graphon(graphon, **_solver_kw(tol, max_iter, damping)).solve(z)


def solve_frequency_law(model: BlockModel, z: complex, tol=DEFAULT_TOL,
                    max_iter=DEFAULT_MAX_ITER, damping=DEFAULT_DAMPING) -> ResolventSolution:
    return frequency_law_system(model, **_solver_kw(tol, max_iter, damping)).solve(z)


def solve_transition_law(model: BlockModel, z: complex, tol=DEFAULT_TOL,
                    max_iter=DEFAULT_MAX_ITER, damping=DEFAULT_DAMPING) -> ResolventSolution:
    return transition_law_system(model, **_solver_kw(tol, max_iter, damping)).solve(z)


@dataclass
class SpectralDensity:
    """Density on a grid with its trapezoidal CDF.

    ``folded=False`` means the symmetrized law on a grid symmetric about 0;
    ``folded=True`` means the singular value law on ``x >= 0``.
    """

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    epsilon: float
    folded: bool = False
    diagnostics: dict = field(default_factory=dict)

    def fold(self) -> "SpectralDensity":
        if self.folded:
            return self
        keep = self.grid >= 0
        x = self.grid[keep]
        if x.size < 2 or x[0] != 0.0:
            raise ValueError("folding needs a grid that contains 0")
        rho = 2.0 * self.density[keep]
        return SpectralDensity(x, rho, _cumtrapz(rho, x), self.epsilon, True, self.diagnostics)

    def mass(self) -> float:
        return float(self.cdf[-1])


def _cumtrapz(y, x):
    out = np.zeros_like(y, dtype=float)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def default_grid(system: ResolventSystem, points: int = 2001, margin: float = 1.05) -> np.ndarray:
    """Symmetric grid over the support bound; an odd point count keeps 0 on the grid."""
    if points % 2 == 0:
        points += 1
    R = margin * system.support_bound()
    half = np.linspace(0.0, R, points // 2 + 1)
    return np.concatenate([-half[:0:-1], half])


def invert_density(system: ResolventSystem, x_grid, epsilon: float = 1e-3,
                   extrapolate: bool = True, mode: str = "parallel") -> SpectralDensity:
    """Density ``-Im s(x + i eps) / pi`` of the symmetrized law.

    With ``extrapolate`` the density is evaluated at ``4 eps, 2 eps, eps`` and
    extrapolated linearly to ``eps -> 0``; grid points where the extrapolation
    goes negative fall back to the raw value at ``eps``.
    """
    x = np.asarray(x_grid, dtype=float)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    epsilons = [4 * epsilon, 2 * epsilon, epsilon] if extrapolate else [epsilon]
    rows = []
    diag = {"epsilons": epsilons, "residual_max": [], "iterations_max": [], "iterations": []}
    for eps in epsilons:
        z = x + 1j * eps
        sol = system.solve_many(z) if mode == "parallel" else system.sweep(z)
        rows.append(-sol.s.imag / np.pi)
        diag["residual_max"].append(float(sol.residual.max()))
        diag["iterations_max"].append(int(sol.iterations.max()))
        diag["iterations"].append(sol.iterations.tolist())
    raw = rows[-1]
    if extrapolate:
        eps_arr = np.asarray(epsilons)
        # least-squares line through (eps, rho(eps)), evaluated at eps = 0
        V = np.vander(eps_arr, 2)
        coef = np.linalg.lstsq(V, np.vstack(rows), rcond=None)[0]
        rho = coef[1]
        fallback = rho < 0
        rho = np.where(fallback, raw, rho)
        diag["fallback_points"] = np.flatnonzero(fallback).tolist()
    else:
        rho = raw
    rho = np.clip(rho, 0.0, None)
    diag["failed_points"] = []
    return SpectralDensity(x, rho, _cumtrapz(rho, x), epsilon, False, diag)


def support_edge(density: SpectralDensity, threshold: float = 1e-4, run: int = 10) -> float:
    """Smallest grid abscissa from which the density stays below ``threshold``
    through the end of the grid (which must be at least ``run`` points long)."""
    d = density.fold() if not density.folded else density
    above = np.flatnonzero(d.density >= threshold)
    start = 0 if above.size == 0 else above[-1] + 1
    if d.grid.size - start < run:
        return float(d.grid[-1])
    return float(d.grid[start])


def law_cdf(density: SpectralDensity):
    """Piecewise-linear CDF of the singular value law, clamped to [0, 1]."""
    d = density.fold()
    x, F = d.grid, np.clip(d.cdf, 0.0, 1.0)

    def cdf(t):
        return np.interp(t, x, F, left=0.0, right=F[-1])

    return cdf


def law_density(model: BlockModel, target: str = "N", points: int = 2001, epsilon: float = 1e-3,
                extrapolate: bool = True, **kw) -> SpectralDensity:
    """Symmetrized limiting density for ``target`` in {"N", "P"} on the default grid."""
    system = law_system(model, target, **kw)
    return invert_density(system, default_grid(system, points), epsilon, extrapolate)
