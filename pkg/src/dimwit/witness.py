"""Rank-based dimension witnesses.

A behaviour produced with classical messages of dimension d has a behaviour
matrix of rank at most d; with quantum messages of dimension d the rank is at
most d^2 (Hermitian d x d operators span a real space of that dimension).
Inverting these gives certified lower bounds on the dimension needed to
reproduce an observed behaviour.  The same square-root bound holds for the
block matrix of a no-signaling Bell behaviour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .behaviours import (
    BellBehaviour,
    PMBehaviour,
    bell_matrix,
    pm_matrix,
    validate_bell,
    validate_pm,
    w_matrix,
)
from .errors import InvalidBehaviourError, SignalingBehaviourError
from .linalg import rank_exact, rank_float
from .matrices import Matrix, identity


def ceil_sqrt(n: int) -> int:
    """Smallest integer d with d*d >= n, via integer arithmetic only."""
    if n < 0:
        raise ValueError("negative argument")
    if n == 0:
        return 0
    return math.isqrt(n - 1) + 1


@dataclass(frozen=True)
class WitnessVerdict:
    classical_lb: Optional[int]
    quantum_lb: Optional[int]
    source: str  # pm_rank | w_rank | bell_rank
    rank_used: int
    mode: str  # exact | float


def _rank(m: Matrix, tol: Optional[float]):
    if m.is_exact and tol is None:
        return rank_exact(m)
    return rank_float(m, tol)


def _require_valid_pm(beh: PMBehaviour):
    report = validate_pm(beh)
    if not report.ok:
        raise InvalidBehaviourError(
            f"behaviour fails validation ({len(report.violations)} violations)",
            report=report,
        )


def witness_pm(beh: PMBehaviour, tol: Optional[float] = None) -> WitnessVerdict:
    """Bounds from the rank r of the behaviour matrix: d >= r classically,
    d >= ceil(sqrt(r)) quantumly."""
    _require_valid_pm(beh)
    res = _rank(pm_matrix(beh), tol)
    return WitnessVerdict(
        classical_lb=res.rank,
        quantum_lb=ceil_sqrt(res.rank),
        source="pm_rank",
        rank_used=res.rank,
        mode=res.mode,
    )


def witness_w(beh: PMBehaviour, tol: Optional[float] = None) -> WitnessVerdict:
    """Bounds from the difference witness: d >= rank(W)+1 classically,
    d >= ceil(sqrt(rank(W)+1)) quantumly.  Needs |X| = 2|Y|."""
    _require_valid_pm(beh)
    res = _rank(w_matrix(beh), tol)
    return WitnessVerdict(
        classical_lb=res.rank + 1,
        quantum_lb=ceil_sqrt(res.rank + 1),
        source="w_rank",
        rank_used=res.rank,
        mode=res.mode,
    )


def witness_bell(beh: BellBehaviour, tol: Optional[float] = None,
                 validation_tol: float = 1e-12) -> WitnessVerdict:
    """Quantum bound d >= ceil(sqrt(rank)) for the Bell block matrix.

    The derivation assumes tensor-product measurements on a no-signaling
    behaviour, so signaling inputs are refused rather than witnessed.
    """
    report = validate_bell(beh, validation_tol)
    if not report.ok:
        signaling = [v for v in report.violations if v.constraint.startswith("no_signaling")]
        if signaling:
            raise SignalingBehaviourError(
                f"no-signaling violated ({len(signaling)} equalities)", report=report)
        raise InvalidBehaviourError(
            f"behaviour fails validation ({len(report.violations)} violations)",
            report=report,
        )
    res = _rank(bell_matrix(beh), tol)
    return WitnessVerdict(
        classical_lb=None,
        quantum_lb=ceil_sqrt(res.rank),
        source="bell_rank",
        rank_used=res.rank,
        mode=res.mode,
    )


class AppendixRelation(NamedTuple):
    rank_w: int
    rank_p: int
    holds: bool


def appendix_relation(beh: PMBehaviour, tol: Optional[float] = None) -> AppendixRelation:
    """Check rank(W) <= rank(P) and replay the row-reduction that proves it.

    Subtracting from each even-indexed row of P its successor (a product of
    full-rank elementary matrices, so rank-preserving) and then deleting the
    odd rows and columns leaves exactly the transpose of W; deleting rows and
    columns cannot increase the rank.
    """
    p = pm_matrix(beh)
    w = w_matrix(beh)  # raises on unsupported shape
    k = beh.scenario.n_inputs_b
    elim = identity(2 * k)
    rows = elim.to_rows()
    for i in range(0, 2 * k, 2):
        rows[i][i + 1] = -1
    elim = Matrix.from_rows(rows)
    reduced = elim.matmul(p)
    exact = p.is_exact and tol is None

    def r(m: Matrix) -> int:
        return (rank_exact(m) if exact else rank_float(m, tol)).rank

    rank_p = r(p)
    if r(reduced) != rank_p:
        raise AssertionError("row operations changed the rank")  # full-rank elim; unreachable
    kept = Matrix.from_rows([
        [reduced.entry(i, j) for j in range(0, 2 * k, 2)] for i in range(0, 2 * k, 2)
    ])
    if exact and kept.to_rows() != w.transpose().to_rows():
        raise AssertionError("deletion did not reproduce the difference witness")
    rank_w = r(w)
    return AppendixRelation(rank_w=rank_w, rank_p=rank_p, holds=rank_w <= rank_p)
