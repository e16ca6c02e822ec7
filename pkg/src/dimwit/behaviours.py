"""Behaviours for prepare-and-measure and Bell experiments.

A prepare-and-measure (PM) behaviour is the table P(b|xy) of binary-outcome
probabilities, with x the preparation input and y the measurement input.  A
Bell behaviour is the table P(ab|xy) of a bipartite experiment with m inputs
and n outputs per party.

All public indices are 0-based.  The conventional 1-based formulas for the
matrix arrangements are translated here, once, and documented next to each
arrangement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .errors import NotADistributionError, ShapeError, UnsupportedScenarioError
from .matrices import Matrix
from .scalars import EXACT, FLOAT, Scalar, coerce, kind_of

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class PMScenario:
    """Alphabet sizes of a PM experiment; outputs are restricted to a bit."""

    n_inputs_a: int  # |X|, preparations
    n_inputs_b: int  # |Y|, measurement settings
    n_outputs: int = 2

    def __post_init__(self):
        if self.n_inputs_a < 1 or self.n_inputs_b < 1:
            raise ShapeError("scenario needs at least one input per party")
        if self.n_outputs != 2:
            raise UnsupportedScenarioError("only binary outputs are supported")


@dataclass(frozen=True)
class BellScenario:
    """(m, n) Bell scenario: m inputs and n outputs per party."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1:
            raise ShapeError("need at least one input per party")
        if self.n < 2:
            raise ShapeError("need at least two outputs per party")


def _coerce_nested(nested, shape):
    """Shape-check a nested sequence and promote entries to one scalar kind."""
    flat = []

    def walk(node, dims):
        if not dims:
            flat.append(node)
            return
        try:
            length = len(node)
        except TypeError:
            raise ShapeError("nesting depth does not match scenario") from None
        if length != dims[0]:
            raise ShapeError(f"axis of length {length}, expected {dims[0]}")
        for child in node:
            walk(child, dims[1:])

    walk(nested, shape)
    coerced, kind = coerce(flat)

    it = iter(coerced)

    def rebuild(dims):
        if not dims:
            return next(it)
        return tuple(rebuild(dims[1:]) for _ in range(dims[0]))

    return rebuild(shape), kind


@dataclass(frozen=True)
class PMBehaviour:
    """Probabilities P(b|xy), stored as probs[b][x][y]."""

    scenario: PMScenario
    probs: tuple
    kind: str = field(init=False)

    def __post_init__(self):
        shape = (2, self.scenario.n_inputs_a, self.scenario.n_inputs_b)
        probs, kind = _coerce_nested(self.probs, shape)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_p0(cls, scenario: PMScenario, p0: Sequence[Sequence[Scalar]]) -> "PMBehaviour":
        """Build from the table P(0|xy); P(1|xy) is its complement."""
        one = 1 if kind_of(v for row in p0 for v in row) == EXACT else 1.0
        p1 = [[one - v for v in row] for row in p0]
        return cls(scenario, (tuple(map(tuple, p0)), tuple(map(tuple, p1))))

    def p(self, b: int, x: int, y: int) -> Scalar:
        return self.probs[b][x][y]

    def as_float(self) -> "PMBehaviour":
        if self.kind == FLOAT:
            return self
        probs = tuple(tuple(tuple(float(v) for v in row) for row in plane) for plane in self.probs)
        return PMBehaviour(self.scenario, probs)


@dataclass(frozen=True)
class BellBehaviour:
    """Probabilities P(ab|xy), stored as probs[a][b][x][y]."""

    scenario: BellScenario
    probs: tuple
    kind: str = field(init=False)

    def __post_init__(self):
        n, m = self.scenario.n, self.scenario.m
        probs, kind = _coerce_nested(self.probs, (n, n, m, m))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "kind", kind)

    def p(self, a: int, b: int, x: int, y: int) -> Scalar:
        return self.probs[a][b][x][y]

    def as_float(self) -> "BellBehaviour":
        if self.kind == FLOAT:
            return self
        probs = tuple(
            tuple(tuple(tuple(float(v) for v in row) for row in plane) for plane in block)
            for block in self.probs
        )
        return BellBehaviour(self.scenario, probs)


Behaviour = Union[PMBehaviour, BellBehaviour]


@dataclass(frozen=True)
class Violation:
    constraint: str  # negative | normalization | no_signaling_a | no_signaling_b
    indices: tuple
    magnitude: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple
    tolerance: float

    @property
    def ok(self) -> bool:
        return not self.violations


def _neg(value, exact: bool, tol: float) -> bool:
    return value < 0 if exact else value < -tol


def _off(value, exact: bool, tol: float) -> bool:
    return value != 0 if exact else abs(value) > tol


def validate_pm(beh: PMBehaviour, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check nonnegativity and per-(x, y) normalization of P(b|xy).

    Exact behaviours are checked exactly; float behaviours within ``tol``.
    """
    exact = beh.kind == EXACT
    m, k = beh.scenario.n_inputs_a, beh.scenario.n_inputs_b
    out = []
    for b in range(2):
        for x in range(m):
            for y in range(k):
                v = beh.p(b, x, y)
                if _neg(v, exact, tol):
                    out.append(Violation(
                        "negative", (b, x, y), float(-v),
                        f"negative entry at ({b},{x},{y})"))
    for x in range(m):
        for y in range(k):
            s = beh.p(0, x, y) + beh.p(1, x, y)
            if _off(s - 1, exact, tol):
                out.append(Violation(
                    "normalization", (x, y), abs(float(s - 1)),
                    f"normalization at ({x},{y}), sum {float(s)}"))
    return ValidationReport(tuple(out), tol)


def validate_bell(beh: BellBehaviour, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check nonnegativity, normalization, and both no-signaling families.

    No-signaling requires each party's marginal to be independent of the other
    party's input: sum_b P(ab|xy) = sum_b P(ab|xy') and the symmetric family.
    """
    exact = beh.kind == EXACT
    m, n = beh.scenario.m, beh.scenario.n
    out = []
    for a in range(n):
        for b in range(n):
            for x in range(m):
                for y in range(m):
                    v = beh.p(a, b, x, y)
                    if _neg(v, exact, tol):
                        out.append(Violation(
                            "negative", (a, b, x, y), float(-v),
                            f"negative entry at ({a},{b},{x},{y})"))
    for x in range(m):
        for y in range(m):
            s = sum(beh.p(a, b, x, y) for a in range(n) for b in range(n))
            if _off(s - 1, exact, tol):
                out.append(Violation(
                    "normalization", (x, y), abs(float(s - 1)),
                    f"normalization at ({x},{y}), sum {float(s)}"))
    # marginal of A must not depend on y
    for a in range(n):
        for x in range(m):
            for y1 in range(m):
                for y2 in range(y1 + 1, m):
                    d = sum(beh.p(a, b, x, y1) - beh.p(a, b, x, y2) for b in range(n))
                    if _off(d, exact, tol):
                        out.append(Violation(
                            "no_signaling_a", (a, x, y1, y2), abs(float(d)),
                            f"A-marginal of a={a}, x={x} differs between y={y1} and y={y2}"))
    # marginal of B must not depend on x
    for b in range(n):
        for y in range(m):
            for x1 in range(m):
                for x2 in range(x1 + 1, m):
                    d = sum(beh.p(a, b, x1, y) - beh.p(a, b, x2, y) for a in range(n))
                    if _off(d, exact, tol):
                        out.append(Violation(
                            "no_signaling_b", (b, x1, x2, y), abs(float(d)),
                            f"B-marginal of b={b}, y={y} differs between x={x1} and x={x2}"))
    return ValidationReport(tuple(out), tol)


def pm_matrix(beh: PMBehaviour) -> Matrix:
    """Arrange P(b|xy) into the |X| x 2|Y| behaviour matrix.

    Row x, column 2y+b: each y contributes the adjacent column pair
    (P(0|xy), P(1|xy)).  (The 1-based convention lists column blocks
    y = 1..|Y| left to right; 0-based storage shifts everything by one.)
    """
    m, k = beh.scenario.n_inputs_a, beh.scenario.n_inputs_b
    rows = [[beh.p(b, x, y) for y in range(k) for b in range(2)] for x in range(m)]
    return Matrix.from_rows(rows)


def bell_matrix(beh: BellBehaviour) -> Matrix:
    """Arrange P(ab|xy) into the mn x mn block matrix with blocks B_xy(a, b).

    Row n*x + a, column n*y + b; block (x, y) is the n x n outcome table of
    the input pair.
    """
    m, n = beh.scenario.m, beh.scenario.n
    rows = []
    for x in range(m):
        for a in range(n):
            rows.append([beh.p(a, b, x, y) for y in range(m) for b in range(n)])
    return Matrix.from_rows(rows)


def w_matrix(beh: PMBehaviour) -> Matrix:
    """Difference witness matrix for |X| = 2|Y| scenarios.

    With k = |Y|, entry (i, j) is P(0 | x=2j, y=i) - P(0 | x=2j+1, y=i) in
    0-based indices (the 1-based convention pairs preparations 2j-1 and 2j).
    """
    m, k = beh.scenario.n_inputs_a, beh.scenario.n_inputs_b
    if m != 2 * k:
        raise UnsupportedScenarioError(
            f"difference witness needs |X| = 2|Y|, got |X|={m}, |Y|={k}")
    rows = [[beh.p(0, 2 * j, i) - beh.p(0, 2 * j + 1, i) for j in range(k)] for i in range(k)]
    return Matrix.from_rows(rows)


def _check_weights(weights, tol: float) -> str:
    kind = kind_of(weights)
    exact = kind == EXACT
    for w in weights:
        if _neg(w, exact, tol):
            raise NotADistributionError(f"negative weight {w}")
    s = sum(weights)
    if _off(s - 1, exact, tol):
        raise NotADistributionError(f"weights sum to {float(s)}, not 1")
    return kind


def _mix_tables(tables, weights, exact):
    first = tables[0]
    if isinstance(first, tuple):
        return tuple(
            _mix_tables([t[i] for t in tables], weights, exact)
            for i in range(len(first))
        )
    if exact:
        return sum(w * v for w, v in zip(weights, tables))
    return float(sum(float(w) * float(v) for w, v in zip(weights, tables)))


def mix(behs: Sequence[Behaviour], weights: Sequence[Scalar], tol: float = DEFAULT_TOL) -> Behaviour:
    """Convex combination of behaviours sharing one scenario.

    The result is exact iff every behaviour and weight is exact; otherwise
    everything is promoted to float.
    """
    if not behs:
        raise ShapeError("nothing to mix")
    if len(behs) != len(weights):
        raise ShapeError(f"{len(behs)} behaviours but {len(weights)} weights")
    first = behs[0]
    if any(type(b) is not type(first) or b.scenario != first.scenario for b in behs):
        raise ShapeError("mixed scenarios")
    wkind = _check_weights(weights, tol)
    exact = wkind == EXACT and all(b.kind == EXACT for b in behs)
    if exact:
        ws = [Fraction(w) for w in weights]
    else:
        ws = [float(w) for w in weights]
        behs = [b.as_float() for b in behs]
    probs = _mix_tables([b.probs for b in behs], ws, exact)
    return type(first)(first.scenario, probs)
