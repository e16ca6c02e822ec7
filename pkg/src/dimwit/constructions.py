"""Exact-rational generators for the explicit behaviour families.

The PM families are built from 1x2 blocks: a block (1, 0) means the output
is deterministically 0 for that input pair, (0, 1) means deterministically 1.
Family labels (the i, j in ``d_block``) follow the conventional 1-based
numbering; everything else in the package is 0-based.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Sequence

from .behaviours import BellBehaviour, BellScenario, PMBehaviour, PMScenario, mix
from .errors import CapExceededError, ShapeError
from .scalars import Scalar

DEFAULT_LDB_CAP = 10**6


def basis_vector(n: int, i: int) -> tuple[int, ...]:
    """Standard basis vector of R^n with a 1 in (1-based) entry i."""
    if not 1 <= i <= n:
        raise ShapeError(f"basis index {i} outside 1..{n}")
    return tuple(int(t == i - 1) for t in range(n))


def d_block(m: int, k: int, i: int, j: int) -> PMBehaviour:
    """Deterministic behaviour whose matrix is all (1, 0) blocks except a
    (0, 1) block at 1-based position (i, j).

    For i = j <= k these are the rank-2 mixing components of ``p_k``.
    """
    if not 1 <= i <= m:
        raise ShapeError(f"row index {i} outside 1..{m}")
    if not 1 <= j <= k:
        raise ShapeError(f"column index {j} outside 1..{k}")
    p0 = [[0 if (x, y) == (i - 1, j - 1) else 1 for y in range(k)] for x in range(m)]
    return PMBehaviour.from_p0(PMScenario(m, k), p0)


def d_zero(m: int, k: int) -> PMBehaviour:
    """All-blocks-(1, 0) behaviour: output 0 regardless of inputs; rank 1."""
    p0 = [[1] * k for _ in range(m)]
    return PMBehaviour.from_p0(PMScenario(m, k), p0)


def p_k(m: int, k: int) -> PMBehaviour:
    """Uniform mixture of the k diagonal-block behaviours d_block(m,k,i,i).

    Its matrix carries (1-1/k, 1/k) on the diagonal blocks and reaches the
    maximal rank k+1, which forces quantum dimension >= sqrt(k+1) while one
    classical bit plus shared randomness reproduces it.
    """
    if m < k + 1:
        raise ShapeError(f"need m >= k+1 for maximal rank, got m={m}, k={k}")
    c = Fraction(1, k)
    p0 = [[1 - c if x == y else Fraction(1) for y in range(k)] for x in range(m)]
    return PMBehaviour.from_p0(PMScenario(m, k), p0)


def q_perturbation(m: int, k: int) -> PMBehaviour:
    """Full-rank deterministic behaviour used as a perturbation direction.

    Row j < k has the (0, 1) block in position j and (1, 0) elsewhere; rows
    k..m-1 are all (1, 0).  Its k+1 distinct rows are linearly independent,
    so the matrix has rank k+1.
    """
    if m < k + 1:
        raise ShapeError(f"need m >= k+1, got m={m}, k={k}")
    p0 = [[0 if x == y and x < k else 1 for y in range(k)] for x in range(m)]
    return PMBehaviour.from_p0(PMScenario(m, k), p0)


def p_epsilon(p: PMBehaviour, eps: Scalar) -> PMBehaviour:
    """(1-eps) p + eps q_perturbation: restores maximal rank for any eps > 0.

    Multiplying the mixture by each of the k+1 independent column vectors
    underlying the perturbation gives a nonzero nonnegative image, which caps
    the kernel dimension at k-1.
    """
    if eps < 0 or eps > 1:
        raise ShapeError(f"eps={eps} outside [0, 1]")
    m, k = p.scenario.n_inputs_a, p.scenario.n_inputs_b
    q = q_perturbation(m, k)
    one = Fraction(1) if not isinstance(eps, float) else 1.0
    return mix([p, q], [one - eps, eps])


def ldb(m: int, n: int, f: Sequence[int], g: Sequence[int]) -> BellBehaviour:
    """Local deterministic behaviour P(ab|xy) = [a = f(x)][b = g(y)].

    ``f`` and ``g`` are 0-based output assignments of length m with values
    in 0..n-1.  Its block matrix is the rank-one outer product of the two
    assignment indicator vectors.
    """
    if len(f) != m or len(g) != m:
        raise ShapeError("assignment length must equal the input count")
    if any(not 0 <= v < n for v in f) or any(not 0 <= v < n for v in g):
        raise ShapeError("assignment value outside output alphabet")
    probs = tuple(
        tuple(
            tuple(
                tuple(int(f[x] == a and g[y] == b) for y in range(m))
                for x in range(m)
            )
            for b in range(n)
        )
        for a in range(n)
    )
    return BellBehaviour(BellScenario(m, n), probs)


def _digits(index: int, base: int, length: int) -> tuple[int, ...]:
    # most significant digit first, so increasing index is lexicographic order
    out = []
    for pos in range(length - 1, -1, -1):
        out.append((index // base**pos) % base)
    return tuple(out)


def enumerate_ldbs(m: int, n: int, cap: int = DEFAULT_LDB_CAP) -> Iterator[BellBehaviour]:
    """Yield all n^(2m) local deterministic behaviours once each.

    Assignments are the base-n digits of an integer counter (most significant
    digit = output for input 0), f-major then g, so the order is lexicographic
    in (f, g) and reproducible.
    """
    total = n ** (2 * m)
    if total > cap:
        raise CapExceededError(required=total, cap=cap)
    per_party = n**m
    for fi in range(per_party):
        f = _digits(fi, n, m)
        for gi in range(per_party):
            yield ldb(m, n, f, _digits(gi, n, m))


def l_star_maps(m: int, n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Assignment pairs of the mn-m+1 components of ``l_star``.

    One all-zeros assignment plus, for every input j and output i >= 1, the
    assignment sending j to i and everything else to 0; both parties use the
    same assignment.
    """
    maps = [(tuple([0] * m), tuple([0] * m))]
    for j in range(m):
        for i in range(1, n):
            f = tuple(i if x == j else 0 for x in range(m))
            maps.append((f, f))
    return maps


def l_star(m: int, n: int) -> BellBehaviour:
    """Uniform mixture of mn-m+1 local deterministic behaviours whose block
    matrix attains the maximal no-signaling rank mn-m+1.

    Being a mixture of local points it is local, yet the rank forces quantum
    dimension >= sqrt(mn-m+1) without shared randomness, so the fixed-dimension
    quantum sets are non-convex whenever d < sqrt(mn-m+1).
    """
    maps = l_star_maps(m, n)
    w = Fraction(1, len(maps))
    return mix([ldb(m, n, f, g) for f, g in maps], [w] * len(maps))


def uniform_pm(m: int, k: int) -> PMBehaviour:
    """P(b|xy) = 1/2 everywhere."""
    half = Fraction(1, 2)
    return PMBehaviour.from_p0(PMScenario(m, k), [[half] * k for _ in range(m)])


def uniform_bell(m: int, n: int) -> BellBehaviour:
    """P(ab|xy) = 1/n^2 everywhere."""
    v = Fraction(1, n * n)
    probs = tuple(
        tuple(tuple(tuple(v for _ in range(m)) for _ in range(m)) for _ in range(n))
        for _ in range(n)
    )
    return BellBehaviour(BellScenario(m, n), probs)
