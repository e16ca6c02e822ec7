"""Dense matrices over a homogeneous scalar kind (exact rational or float).

Row-major storage.  Instances are immutable values; operations return new
matrices.  Only the handful of operations the witnesses need are provided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .scalars import EXACT, Scalar, coerce


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    entries: tuple  # row-major, length rows * cols
    kind: str = field(init=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeError(f"matrix shape ({self.rows}, {self.cols}) is degenerate")
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        entries, kind = coerce(self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]]) -> "Matrix":
        if not rows:
            raise ShapeError("matrix needs at least one row")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ShapeError("ragged rows")
        flat = tuple(v for r in rows for v in r)
        return cls(len(rows), ncols, flat)

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT

    def entry(self, i: int, j: int) -> Scalar:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[Scalar]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        flat = tuple(self.entry(i, j) for j in range(self.cols) for i in range(self.rows))
        return Matrix(self.cols, self.rows, flat)

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                out.append(sum(ri[t] * other.entry(t, j) for t in range(self.cols)))
        return Matrix(self.rows, other.cols, tuple(out))

    def sub(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("shape mismatch in subtraction")
        return Matrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def max_abs(self) -> Scalar:
        return max(abs(v) for v in self.entries)

    def to_float_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.entries], dtype=float).reshape(self.rows, self.cols)


def identity(n: int) -> Matrix:
    return Matrix.from_rows([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])
