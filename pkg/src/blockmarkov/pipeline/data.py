"""Transition data ingestion, preprocessing and block-model parameter estimation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyCluster, EmptyInput, ParseError, ZeroClusterRow
from ..matrices import EdgeCounts
from ..model import BlockModel

FORMATS = ("csv-pairs", "state-sequence")


@dataclass(frozen=True)
class TransitionDataset:
    """A bag of transitions between states relabeled densely to 0..n-1."""

    n_states: int
    transitions: np.ndarray  # (L, 2) int64
    labels: tuple = ()
    provenance: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return len(self.transitions)

    def counts(self) -> EdgeCounts:
        return EdgeCounts.from_pairs(self.transitions[:, 0], self.transitions[:, 1], self.n_states)


def _relabel(raw_pairs, labels=None):
    """Dense relabeling in order of first appearance."""
    index = {}
    order = []
    out = np.empty((len(raw_pairs), 2), dtype=np.int64)
    for t, pair in enumerate(raw_pairs):
        for side, lab in enumerate(pair):
            if lab not in index:
                index[lab] = len(order)
                order.append(lab)
            out[t, side] = index[lab]
    if labels is not None:
        order = [labels[o] for o in order]
    return out, tuple(order)


def read_transitions(path, format: str = "csv-pairs") -> TransitionDataset:
    """Read "from,to" rows (header optional) or a one-state-per-line sequence."""
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    path = Path(path)
    pairs = []
    with open(path, newline="") as fh:
        if format == "csv-pairs":
            for lineno, row in enumerate(csv.reader(fh), start=1):
                row = [c.strip() for c in row]
                if not row or row == [""]:
                    continue
                if len(row) != 2 or not row[0] or not row[1]:
                    raise ParseError(lineno, f"expected 'from,to', got {','.join(row)!r}")
                if lineno == 1 and [c.lower() for c in row] == ["from", "to"]:
                    continue
                pairs.append((row[0], row[1]))
        else:
            seq = []
            for lineno, line in enumerate(fh, start=1):
                s = line.strip()
                if not s:
                    continue
                if "," in s or len(s.split()) != 1:
                    raise ParseError(lineno, f"expected one state per line, got {s!r}")
                seq.append(s)
            pairs = list(zip(seq[:-1], seq[1:]))
    if not pairs:
        raise EmptyInput(f"{path}: no transitions")
    transitions, labels = _relabel(pairs)
    return TransitionDataset(len(labels), transitions, labels,
                             {"source": str(path), "format": format, "raw_transitions": len(pairs)})


def visit_counts(data: TransitionDataset) -> np.ndarray:
    """Number of transitions each state takes part in (a self-loop counts once)."""
    t = data.transitions
    v = np.bincount(t[:, 0], minlength=data.n_states)
    v += np.bincount(t[:, 1], minlength=data.n_states)
    v -= np.bincount(t[t[:, 0] == t[:, 1], 0], minlength=data.n_states)
    return v


def preprocess(data: TransitionDataset, min_visits: int = 0, drop_self_loops: bool = False) -> TransitionDataset:
    """Drop self-transitions (optional), then trim rarely visited states until stable."""
    if min_visits < 0:
        raise ValueError("min_visits must be nonnegative")
    t = data.transitions
    if drop_self_loops:
        t = t[t[:, 0] != t[:, 1]]
    n = data.n_states
    while True:
        if len(t) == 0:
            raise EmptyInput("no transitions survive preprocessing")
        probe = TransitionDataset(n, t)
        low = visit_counts(probe) < min_visits
        present = np.zeros(n, bool)
        present[t.ravel()] = True
        bad = low & present
        if not bad.any():
            break
        t = t[~(bad[t[:, 0]] | bad[t[:, 1]])]
    pairs = [tuple(r) for r in t.tolist()]
    labels = data.labels if data.labels else tuple(range(n))
    transitions, new_labels = _relabel(pairs, labels)
    prov = dict(data.provenance, min_visits=min_visits, drop_self_loops=drop_self_loops)
    return TransitionDataset(len(new_labels), transitions, new_labels, prov)


@dataclass(frozen=True)
class EstimatedModel:
    lambda_hat: float
    alpha_hat: np.ndarray
    pi_hat: np.ndarray
    p_hat: np.ndarray
    clustering: np.ndarray

    @property
    def K(self) -> int:
        return len(self.alpha_hat)

    def to_model(self) -> BlockModel:
        """Block model with the estimated p, alpha and lambda; its equilibrium is
        recomputed from p_hat."""
        alpha = self.alpha_hat / self.alpha_hat.sum()
        return BlockModel(self.p_hat, alpha, self.lambda_hat)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "p": self.p_hat.tolist(),
            "alpha": self.alpha_hat.tolist(),
            "lambda": self.lambda_hat,
            "pi_hat": self.pi_hat.tolist(),
        }


def estimate_parameters(data: TransitionDataset, clustering) -> EstimatedModel:
    """Plug-in estimates of lambda, alpha, pi and p from the frequency matrix.

    ``clustering`` maps each state 0..n-1 to a cluster 0..K-1.
    """
    sigma = np.asarray(clustering, dtype=np.int64)
    n = data.n_states
    if sigma.shape != (n,):
        raise ValueError(f"clustering must assign all {n} states")
    if sigma.min() < 0:
        raise ValueError("cluster indices must be nonnegative")
    K = int(sigma.max()) + 1
    sizes = np.bincount(sigma, minlength=K)
    for k in range(K):
        if sizes[k] == 0:
            raise EmptyCluster(k)
    t = data.transitions
    ell = len(t)
    block = np.zeros((K, K))
    np.add.at(block, (sigma[t[:, 0]], sigma[t[:, 1]]), 1.0)
    out = block.sum(axis=1)
    for k in range(K):
        if out[k] == 0:
            raise ZeroClusterRow(k)
    return EstimatedModel(
        lambda_hat=ell / n**2,
        alpha_hat=sizes / n,
        pi_hat=block.sum(axis=0) / ell,
        p_hat=block / out[:, None],
        clustering=sigma,
    )


def read_clustering(path, data: TransitionDataset | None = None) -> np.ndarray:
    """Read "state,cluster" rows. State labels are matched against the dataset's
    labels when given, otherwise read as 0-based integers. Cluster labels are
    relabeled densely in sorted order."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or row == [""]:
                continue
            if len(row) != 2:
                raise ParseError(lineno, "expected 'state,cluster'")
            if lineno == 1 and [c.lower() for c in row] == ["state", "cluster"]:
                continue
            rows.append((lineno, row[0], row[1]))
    if data is not None and data.labels:
        index = {str(lab): i for i, lab in enumerate(data.labels)}
        n = data.n_states
    else:
        index = None
        n = len(rows)
    names = {c for _, _, c in rows}
    numeric = all(c.lstrip("-").isdigit() for c in names)
    clusters = sorted(names, key=int) if numeric else sorted(names)
    cidx = {c: k for k, c in enumerate(clusters)}
    sigma = np.full(n, -1, dtype=np.int64)
    for lineno, s, c in rows:
        if index is not None:
            if s not in index:
                continue  # state removed by preprocessing
            i = index[s]
        else:
            try:
                i = int(s)
            except ValueError:
                raise ParseError(lineno, f"state {s!r} is not an integer") from None
            if not 0 <= i < n:
                raise ParseError(lineno, f"state {i} out of range")
        sigma[i] = cidx[c]
    missing = np.flatnonzero(sigma < 0)
    if missing.size:
        raise ValueError(f"{missing.size} state(s) have no cluster, e.g. {missing[0]}")
    return sigma


def path_dataset(states, n: int) -> TransitionDataset:
    """Dataset from a simulated path with the identity labeling of 0..n-1."""
    states = np.asarray(states, dtype=np.int64)
    t = np.column_stack([states[:-1], states[1:]])
    return TransitionDataset(n, t, tuple(range(n)), {"source": "simulation"})

