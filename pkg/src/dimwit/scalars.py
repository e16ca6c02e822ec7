"""Scalar kinds: exact rationals (`fractions.Fraction`) or IEEE doubles.

Every matrix and behaviour is homogeneous in scalar kind.  Mixed inputs are
promoted: if any entry is a float the whole collection becomes float;
rationals are never inferred from floats.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DimwitError

Scalar = Union[int, Fraction, float]

EXACT = "exact"
FLOAT = "float"


def is_exact_scalar(value: Scalar) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def kind_of(values: Iterable[Scalar]) -> str:
    """Joint scalar kind of a collection (EXACT unless a float appears)."""
    kind = EXACT
    for v in values:
        if isinstance(v, float):
            kind = FLOAT
        elif not is_exact_scalar(v):
            raise DimwitError(f"unsupported scalar {v!r} of type {type(v).__name__}")
    return kind


def coerce(values: Sequence[Scalar]) -> tuple[tuple, str]:
    """Promote a sequence to a homogeneous tuple: all Fraction or all float."""
    kind = kind_of(values)
    if kind == EXACT:
        return tuple(Fraction(v) for v in values), EXACT
    out = []
    for v in values:
        f = float(v)
        if not math.isfinite(f):
            raise DimwitError(f"non-finite scalar {v!r}")
        out.append(f)
    return tuple(out), FLOAT


def to_float(value: Scalar) -> float:
    return float(value)
