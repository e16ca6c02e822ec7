"""Exact and tolerance-aware rank computation.

Exact mode runs fraction-free (Bareiss) Gaussian elimination over the
integers after clearing denominators, so rank-deficiency certificates do not
depend on floating-point thresholds.  Float mode counts singular values above
a relative tolerance, the usual numerical-rank convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ShapeError, WrongModeError
from .matrices import Matrix
from .scalars import EXACT

EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class RankResult:
    rank: int
    mode: str  # exact | float
    singular_values: Optional[tuple] = None
    tolerance_used: Optional[float] = None


def _integer_rows(m: Matrix) -> list[list[int]]:
    # Scaling a row by a positive integer leaves the rank unchanged.
    rows = []
    for i in range(m.rows):
        row = [Fraction(v) for v in m.row(i)]
        scale = math.lcm(*(v.denominator for v in row)) if row else 1
        rows.append([int(v * scale) for v in row])
    return rows


def rank_exact(m: Matrix) -> RankResult:
    """Rank over the rationals by fraction-free elimination.

    Each update divides by the previous pivot, which is exact by Sylvester's
    determinant identity, so the elimination stays in the integers and never
    divides by zero.
    """
    if not m.is_exact:
        raise WrongModeError("exact rank needs rational entries")
    a = _integer_rows(m)
    n_rows, n_cols = m.rows, m.cols
    rank = 0
    prev = 1
    col = 0
    while rank < n_rows and col < n_cols:
        piv = next((i for i in range(rank, n_rows) if a[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        if piv != rank:
            a[rank], a[piv] = a[piv], a[rank]
        pivot = a[rank][col]
        prow = a[rank]
        for i in range(rank + 1, n_rows):
            ri = a[i]
            lead = ri[col]
            a[i] = [(ri[j] * pivot - lead * prow[j]) // prev for j in range(n_cols)]
        prev = pivot
        rank += 1
        col += 1
    return RankResult(rank=rank, mode=EXACT)


def default_rank_tolerance(rows: int, cols: int) -> float:
    return max(rows, cols) * EPS


def rank_float(m: Matrix, tol: Optional[float] = None) -> RankResult:
    """Numerical rank: singular values above ``tol * sigma_max`` count.

    ``tol`` is relative; the default is max(rows, cols) times machine epsilon.
    Works on both float and rational matrices (the latter are converted).
    """
    arr = m.to_float_array()
    if not np.all(np.isfinite(arr)):
        raise WrongModeError("non-finite entries")
    if tol is None:
        tol = default_rank_tolerance(m.rows, m.cols)
    sigma = np.linalg.svd(arr, compute_uv=False)
    smax = float(sigma[0]) if sigma.size else 0.0
    rank = int(np.count_nonzero(sigma > tol * smax)) if smax > 0 else 0
    return RankResult(
        rank=rank,
        mode="float",
        singular_values=tuple(float(s) for s in sigma),
        tolerance_used=tol,
    )


def rank_of(m: Matrix, tol: Optional[float] = None) -> RankResult:
    """Exact rank for rational matrices, numerical rank otherwise."""
    if m.is_exact and tol is None:
        return rank_exact(m)
    return rank_float(m, tol)


def affine_dim(points: Sequence[Matrix], mode: Optional[str] = None,
               tol: Optional[float] = None) -> int:
    """Dimension of the affine hull of a set of equally-shaped matrices.

    Equals the rank of the matrix whose rows are the flattened differences
    point_i - point_0.
    """
    if not points:
        raise ShapeError("need at least one point")
    base = points[0]
    shape = (base.rows, base.cols)
    for p in points[1:]:
        if (p.rows, p.cols) != shape:
            raise ShapeError("points of different shapes")
    if len(points) == 1:
        return 0
    diffs = Matrix.from_rows([list(p.sub(base).entries) for p in points[1:]])
    if mode is None:
        mode = EXACT if diffs.is_exact else "float"
    if mode == EXACT:
        return rank_exact(diffs).rank
    return rank_float(diffs, tol).rank
