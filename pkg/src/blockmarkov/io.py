"""CSV / JSON readers and writers for counts, matrices, spectra and densities.

Floats are written with 17 significant digits so every file round-trips exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParseError
from .limitlaw import SpectralDensity
from .matrices import BlockConstantMatrix, EdgeCounts

FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FMT % float(v)


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_numeric(path, ncols=None, header=None) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and header is not None and [c.strip() for c in row] == header:
                continue
            if ncols is not None and len(row) != ncols:
                raise ParseError(lineno, f"expected {ncols} columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError(lineno, f"non-numeric field in {row!r}") from None
    return np.array(rows, dtype=float)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def write_counts(path, counts: EdgeCounts) -> None:
    i, j, v = counts.triplets()
    write_rows(path, ["i", "j", "value"], zip(i, j, v))


def read_counts(path, n: int) -> EdgeCounts:
    a = _read_numeric(path, 3, ["i", "j", "value"])
    if a.size == 0:
        return EdgeCounts.from_pairs([], [], n)
    m = sp.csr_matrix((a[:, 2].astype(np.int64), (a[:, 0].astype(np.int64), a[:, 1].astype(np.int64))),
                      shape=(n, n))
    return EdgeCounts(m)


def write_sparse(path, matrix) -> None:
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    write_rows(path, ["i", "j", "value"],
               zip(coo.row[order], coo.col[order], coo.data[order].astype(float)))


def write_dense(path, M) -> None:
    write_rows(path, None, np.asarray(M, dtype=float))


def read_dense(path) -> np.ndarray:
    return _read_numeric(path)


def write_block_constant(path, B: BlockConstantMatrix) -> None:
    """K x K core, then one line of cluster sizes prefixed by '#sizes'."""
    write_rows(path, None, B.values)
    with open(path, "a") as fh:
        fh.write("#sizes," + ",".join(str(int(s)) for s in B.layout.sizes) + "\n")


def write_spectrum(path, values) -> None:
    write_rows(path, None, ([v] for v in values))


def read_spectrum(path) -> np.ndarray:
    return _read_numeric(path, 1).ravel()


def write_histogram(path, hist) -> None:
    write_rows(path, ["lo", "hi", "mass"], ((lo, hi, m) for (lo, hi), m in hist))


def write_value_counts(path, counts) -> None:
    vals, cnt = np.unique(np.asarray(counts), return_counts=True)
    write_rows(path, ["value", "count"], zip(vals.astype(int), cnt.astype(int)))


def write_density(path, density) -> None:
    write_rows(path, ["x", "density", "cdf"], zip(density.grid, density.density, density.cdf))


def read_density(path):
    a = _read_numeric(path, 3, ["x", "density", "cdf"])
    x = a[:, 0]
    return SpectralDensity(x, a[:, 1], a[:, 2], epsilon=float("nan"), folded=bool(x[0] >= 0))
