"""Limiting moments from ordered-tree homomorphism densities, density
quadrature, and the Hankel positivity check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import ResourceLimit
from .limitlaw import SpectralDensity, StepGraphon

MAX_TREE_EDGES = 12
LABELING_BUDGET = 10**7
PSD_TOL = 1e-9


def catalan(m: int) -> int:
    return comb(2 * m, m) // (m + 1)


@dataclass(frozen=True)
class OrderedTree:
    """Rooted ordered tree as a parent array in depth-first order.

    Vertex 0 is the root (parent -1); children of a vertex appear in
    increasing label order, which fixes their left-to-right order.
    """

    parents: tuple

    @property
    def vertices(self) -> int:
        return len(self.parents)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parents) if p >= 0]

    def children(self, v: int) -> list[int]:
        return [c for c, p in enumerate(self.parents) if p == v]

    @classmethod
    def from_dyck(cls, word: str) -> "OrderedTree":
        """Tree whose depth-first walk steps down on "(" and up on ")"."""
        parents, stack = [-1], [0]
        for ch in word:
            if ch == "(":
                parents.append(stack[-1])
                stack.append(len(parents) - 1)
            else:
                stack.pop()
        return cls(tuple(parents))


def _dyck_words(m: int):
    if m == 0:
        yield ""
        return
    for k in range(m):
        for inner in _dyck_words(k):
            for rest in _dyck_words(m - 1 - k):
                yield "(" + inner + ")" + rest


def enumerate_ordered_trees(m: int) -> list[OrderedTree]:
    """All ordered trees with ``m`` edges (Catalan(m) of them)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m > MAX_TREE_EDGES:
        raise ResourceLimit(f"refusing to enumerate Catalan({m}) = {catalan(m)} trees")
    return [OrderedTree.from_dyck(w) for w in _dyck_words(m)]


def _hom_density_tree(tree: OrderedTree, graphon: StepGraphon) -> float:
    w = graphon.widths
    A = graphon.values * w[None, :]
    msg = [None] * tree.vertices
    # labels are in depth-first order, so every child has a larger label than its parent
    for v in reversed(range(tree.vertices)):
        f = np.ones(graphon.blocks)
        for c in tree.children(v):
            f = f * (A @ msg[c])
        msg[v] = f
    return float(w @ msg[0])


def _hom_density_labelings(tree: OrderedTree, graphon: StepGraphon, budget: int) -> float:
    B, V = graphon.blocks, tree.vertices
    if B**V > budget:
        raise ResourceLimit(f"{B}^{V} block labelings exceed the budget of {budget}")
    w, W = graphon.widths, graphon.values
    edges = tree.edges
    total = 0.0
    for lab in itertools.product(range(B), repeat=V):
        term = np.prod([w[b] for b in lab])
        for u, v in edges:
            term *= W[lab[u], lab[v]]
        total += term
    return float(total)


def hom_density(tree: OrderedTree, graphon: StepGraphon, method: str = "tree",
                budget: int = LABELING_BUDGET) -> float:
    """Homomorphism density of ``tree`` into a step graphon, computed exactly.

    ``method="labelings"`` sums over all block labelings of the vertices
    (cost B**|V|); ``method="tree"`` evaluates the same sum by passing messages
    from the leaves to the root.
    """
    if method == "tree":
        return _hom_density_tree(tree, graphon)
    if method == "labelings":
        return _hom_density_labelings(tree, graphon, budget)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class MomentSequence:
    values: np.ndarray  # m_0 .. m_{2M}
    provenance: str

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def to_dict(self) -> dict:
        return {str(k): float(v) for k, v in enumerate(self.values)}


def tree_moments(graphon: StepGraphon, M: int) -> MomentSequence:
    """Moments m_0..m_{2M}: even ones sum tree densities over ordered trees, odd ones vanish."""
    vals = np.zeros(2 * M + 1)
    vals[0] = 1.0
    for m in range(1, M + 1):
        vals[2 * m] = sum(hom_density(t, graphon) for t in enumerate_ordered_trees(m))
    return MomentSequence(vals, "tree-sum")


def quadrature_moments(density: SpectralDensity, M: int) -> MomentSequence:
    """Trapezoidal moments m_0..m_{2M} of a symmetrized density."""
    if density.folded:
        raise ValueError("quadrature moments need the symmetrized (unfolded) density")
    x, rho = density.grid, density.density
    vals = np.array([np.trapezoid(x**k * rho, x) for k in range(2 * M + 1)])
    return MomentSequence(vals, "quadrature")


class HankelCheck(NamedTuple):
    psd: bool
    min_eigenvalue: float


def hankel_psd(moments, k: int) -> HankelCheck:
    """Whether the (k+1)x(k+1) Hankel matrix of moments is positive semi-definite."""
    m = np.asarray(moments.values if isinstance(moments, MomentSequence) else moments, dtype=float)
    if 2 * k > m.size - 1:
        raise ValueError(f"order {k} needs moments up to m_{2 * k}, have up to m_{m.size - 1}")
    H = np.array([[m[i + j] for j in range(k + 1)] for i in range(k + 1)])
    lo = float(np.linalg.eigvalsh(H)[0])
    return HankelCheck(lo >= -PSD_TOL, lo)
