"""Sample paths of a block Markov chain and streamed edge-traversal counts.

Every step is drawn in two stages: the next cluster from row ``sigma(X_t)`` of
``p``, then a uniform state inside that cluster. Paths are generated in fixed
chunks from a Philox generator, so a materialized path and a streamed count
consume exactly the same random numbers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Union

import numba
import numpy as np
import scipy.sparse as sp

from .model import BlockModel, ClusterLayout

CHUNK = 1 << 18


@dataclass(frozen=True)
class Equilibrium:
    pass


@dataclass(frozen=True)
class UniformState:
    pass


@dataclass(frozen=True)
class PointMass:
    state: int


@dataclass(frozen=True)
class ClusterMass:
    cluster: int


InitialDistribution = Union[Equilibrium, UniformState, PointMass, ClusterMass]


@dataclass(frozen=True)
class SamplePath:
    states: np.ndarray
    model: BlockModel
    layout: ClusterLayout
    seed: int

    @property
    def ell(self) -> int:
        return len(self.states) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def replica_seed(master: int, index: int) -> int:
    """64-bit seed of replica ``index``; depends only on (master, index)."""
    ss = np.random.SeedSequence([int(master), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@numba.njit(cache=False)
def _cluster_chain(start, u, cum):  # pragma: no cover - compiled
    out = np.empty(u.shape[0], dtype=np.int64)
    c = start
    K = cum.shape[1]
    for t in range(u.shape[0]):
        x = u[t]
        k = 0
        while k < K - 1 and x >= cum[c, k]:
            k += 1
        c = k
        out[t] = c
    return out


def _cumulative_rows(p: np.ndarray) -> np.ndarray:
    cum = np.cumsum(p, axis=1)
    # pin everything from the last positive entry on to 1 so rounding in the
    # cumulative sum can never select a trailing zero-probability cluster
    for row, prow in zip(cum, p):
        row[np.flatnonzero(prow > 0)[-1]:] = 1.0
    return cum


def _initial_state(model, layout, init, rng) -> int:
    if isinstance(init, Equilibrium):
        k = int(np.searchsorted(np.cumsum(model.pi), rng.random(), side="right"))
        k = min(k, model.K - 1)
        return int(layout.offsets[k] + np.floor(rng.random() * layout.sizes[k]))
    if isinstance(init, UniformState):
        return int(np.floor(rng.random() * layout.n))
    if isinstance(init, PointMass):
        if not 0 <= init.state < layout.n:
            raise ValueError(f"initial state {init.state} outside 0..{layout.n - 1}")
        return int(init.state)
    if isinstance(init, ClusterMass):
        k = init.cluster
        if not 0 <= k < model.K:
            raise ValueError(f"initial cluster {k} outside 0..{model.K - 1}")
        return int(layout.offsets[k] + np.floor(rng.random() * layout.sizes[k]))
    raise TypeError(f"unknown initial distribution {init!r}")


def iter_path_chunks(model: BlockModel, layout: ClusterLayout, ell: int,
                     init: InitialDistribution, seed: int) -> Iterator[np.ndarray]:
    """Yield the path ``X_0..X_ell`` in consecutive chunks.

    The first chunk starts with ``X_0``; later chunks hold only new states.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if layout.K != model.K:
        raise ValueError("layout and model disagree on the number of clusters")
    rng = make_rng(seed)
    cum = _cumulative_rows(model.p)
    sizes = layout.sizes.astype(float)
    offsets = layout.offsets[:-1]
    x0 = _initial_state(model, layout, init, rng)
    cluster = int(layout.sigma[x0])
    first = True
    done = 0
    while done < ell:
        m = min(CHUNK, ell - done)
        clusters = _cluster_chain(cluster, rng.random(m), cum)
        states = offsets[clusters] + np.floor(rng.random(m) * sizes[clusters]).astype(np.int64)
        cluster = int(clusters[-1])
        if first:
            states = np.concatenate([[x0], states])
            first = False
        done += m
        yield states


def sample_path(model: BlockModel, layout: ClusterLayout, ell: int,
                init: InitialDistribution = Equilibrium(), seed: int = 0) -> SamplePath:
    states = np.concatenate(list(iter_path_chunks(model, layout, ell, init, seed)))
    return SamplePath(states=states, model=model, layout=layout, seed=seed)


def stream_edge_counts(model: BlockModel, layout: ClusterLayout, ell: int,
                       init: InitialDistribution = Equilibrium(), seed: int = 0):
    """Edge-traversal counts of a path, accumulated chunk by chunk."""
    from .matrices import EdgeCounts

    n = layout.n
    total = sp.csr_matrix((n, n), dtype=np.int64)
    prev = None
    for chunk in iter_path_chunks(model, layout, ell, init, seed):
        seq = chunk if prev is None else np.concatenate([[prev], chunk])
        ones = np.ones(len(seq) - 1, dtype=np.int64)
        total = total + sp.csr_matrix((ones, (seq[:-1], seq[1:])), shape=(n, n))
        prev = seq[-1]
    total.sum_duplicates()
    return EdgeCounts(total)


def _edge_count(model, layout, ell, edge, seed) -> int:
    i, j = edge
    count = 0
    prev = -1
    for chunk in iter_path_chunks(model, layout, ell, Equilibrium(), seed):
        count += int(np.count_nonzero((chunk[:-1] == i) & (chunk[1:] == j)))
        if prev == i and chunk[0] == j:
            count += 1
        prev = int(chunk[-1])
    return count


def _edge_count_batch(args):
    model, layout, ell, edge, seeds = args
    return [_edge_count(model, layout, ell, edge, s) for s in seeds]


def replicate_edge_count(model: BlockModel, layout: ClusterLayout, ell: int, edge,
                         replicas: int, seed: int, workers: int = 1) -> np.ndarray:
    """Traversal counts of ``edge`` in ``replicas`` independent equilibrium-start paths.

    Replica ``r`` is driven by ``replica_seed(seed, r)``, so results do not
    depend on ``workers`` or on evaluation order.
    """
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    i, j = (int(v) for v in edge)
    if not (0 <= i < layout.n and 0 <= j < layout.n):
        raise ValueError(f"edge {edge} outside the state space")
    seeds = [replica_seed(seed, r) for r in range(replicas)]
    if workers <= 1:
        counts = [_edge_count(model, layout, ell, (i, j), s) for s in seeds]
    else:
        batches = [seeds[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_edge_count_batch,
                                  [(model, layout, ell, (i, j), b) for b in batches]))
        counts = [0] * replicas
        for w, part in enumerate(parts):
            counts[w::workers] = part
    return np.asarray(counts, dtype=np.int64)
