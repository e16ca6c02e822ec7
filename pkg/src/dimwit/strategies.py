"""Generative models for behaviours and reproducible strategy sampling.

Classical PM strategies are stochastic encoder/decoder tables; quantum ones
are density matrices and POVMs.  Sampling is a pure function of (parameters,
seed): per-sample generators are derived from the master seed by spawn keys,
so serial and parallel runs agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .behaviours import (
    BellBehaviour,
    BellScenario,
    PMBehaviour,
    PMScenario,
)
from .errors import ShapeError, StrategyError
from .scalars import EXACT, coerce, kind_of

HERM_TOL = 1e-8
OP_TOL = 1e-10
STOCH_TOL = 1e-12

POVM_LAW_PROJECTIVE = "haar_projective/v1"
POVM_LAW_WISHART = "wishart/v1"


def split_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-derived generator: deterministic in (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _check_stochastic(rows, what: str):
    exact = kind_of(v for row in rows for v in row) == EXACT
    for idx, row in enumerate(rows):
        if any((v < 0) if exact else (v < -STOCH_TOL) for v in row):
            raise StrategyError(f"{what}: negative probability in row {idx}")
        s = sum(row)
        bad = (s != 1) if exact else abs(s - 1) > STOCH_TOL
        if bad:
            raise StrategyError(f"{what}: row {idx} sums to {float(s)}")


@dataclass(frozen=True)
class ClassicalPMStrategy:
    """Encoder s(m|x) over d messages and decoder t(b|m,y) over the output bit."""

    d: int
    s: tuple  # s[x][m]
    t: tuple  # t[m][y][b]

    def __post_init__(self):
        if self.d < 1:
            raise StrategyError("message dimension must be positive")
        s = tuple(tuple(row) for row in self.s)
        t = tuple(tuple(tuple(cell) for cell in row) for row in self.t)
        if any(len(row) != self.d for row in s):
            raise ShapeError("encoder rows must have one entry per message")
        if len(t) != self.d or any(len(cell) != 2 for row in t for cell in row):
            raise ShapeError("decoder must be indexed (message, y, bit)")
        _check_stochastic(s, "encoder")
        _check_stochastic([cell for row in t for cell in row], "decoder")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    @property
    def n_inputs_a(self) -> int:
        return len(self.s)

    @property
    def n_inputs_b(self) -> int:
        return len(self.t[0])


def _frozen_complex(mat, what: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{what}: expected a square matrix, got {arr.shape}")
    dev = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if dev > HERM_TOL:
        raise StrategyError(f"{what}: Hermiticity deviation {dev:.3e} exceeds {HERM_TOL}")
    arr = (arr + arr.conj().T) / 2
    arr.setflags(write=False)
    return arr


def _check_psd(arr: np.ndarray, what: str):
    lo = float(np.linalg.eigvalsh(arr)[0])
    if lo < -OP_TOL:
        raise StrategyError(f"{what}: smallest eigenvalue {lo:.3e} below -{OP_TOL}")


def _check_povm(elements: Sequence[np.ndarray], dim: int, what: str):
    total = np.zeros((dim, dim), dtype=complex)
    for e in elements:
        if e.shape != (dim, dim):
            raise ShapeError(f"{what}: element of shape {e.shape}, expected {(dim, dim)}")
        _check_psd(e, what)
        total = total + e
    if float(np.max(np.abs(total - np.eye(dim)))) > OP_TOL:
        raise StrategyError(f"{what}: elements do not sum to the identity")


@dataclass(frozen=True)
class QuantumPMStrategy:
    """States rho_x and binary POVMs {Pi_b^y} on a d-dimensional message space."""

    d: int
    states: tuple  # x -> d x d density matrix
    povms: tuple  # y -> (Pi_0, Pi_1)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise StrategyError("dimension must be positive")
        states = tuple(_frozen_complex(s, f"state {i}") for i, s in enumerate(self.states))
        for i, s in enumerate(states):
            if s.shape != (self.d, self.d):
                raise ShapeError(f"state {i}: shape {s.shape}, expected {(self.d, self.d)}")
            _check_psd(s, f"state {i}")
            if abs(float(np.trace(s).real) - 1) > OP_TOL:
                raise StrategyError(f"state {i}: trace {np.trace(s).real} != 1")
        povms = tuple(
            tuple(_frozen_complex(e, f"povm {y}[{b}]") for b, e in enumerate(els))
            for y, els in enumerate(self.povms)
        )
        for y, els in enumerate(povms):
            if len(els) != 2:
                raise ShapeError(f"povm {y}: binary output needs 2 elements")
            _check_povm(els, self.d, f"povm {y}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "povms", povms)

    @property
    def n_inputs_a(self) -> int:
        return len(self.states)

    @property
    def n_inputs_b(self) -> int:
        return len(self.povms)


@dataclass(frozen=True)
class BellQuantumStrategy:
    """Shared state on C^dA x C^dB with per-input n-outcome POVMs per party."""

    dA: int
    dB: int
    state: np.ndarray  # (dA*dB) x (dA*dB)
    meas_a: tuple  # x -> (E_0, ..., E_{n-1}), each dA x dA
    meas_b: tuple  # y -> (F_0, ..., F_{n-1}), each dB x dB
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dA < 1 or self.dB < 1:
            raise StrategyError("local dimensions must be positive")
        dim = self.dA * self.dB
        state = _frozen_complex(self.state, "state")
        if state.shape != (dim, dim):
            raise ShapeError(f"state: shape {state.shape}, expected {(dim, dim)}")
        _check_psd(state, "state")
        if abs(float(np.trace(state).real) - 1) > OP_TOL:
            raise StrategyError(f"state: trace {np.trace(state).real} != 1")
        meas_a = tuple(
            tuple(_frozen_complex(e, f"A-measurement {x}[{a}]") for a, e in enumerate(els))
            for x, els in enumerate(self.meas_a)
        )
        meas_b = tuple(
            tuple(_frozen_complex(e, f"B-measurement {y}[{b}]") for b, e in enumerate(els))
            for y, els in enumerate(self.meas_b)
        )
        n_a = {len(els) for els in meas_a}
        n_b = {len(els) for els in meas_b}
        if len(n_a) != 1 or n_a != n_b:
            raise ShapeError("both parties need the same output count for every input")
        for x, els in enumerate(meas_a):
            _check_povm(els, self.dA, f"A-measurement {x}")
        for y, els in enumerate(meas_b):
            _check_povm(els, self.dB, f"B-measurement {y}")
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "meas_a", meas_a)
        object.__setattr__(self, "meas_b", meas_b)

    @property
    def m(self) -> int:
        return len(self.meas_a)

    @property
    def n(self) -> int:
        return len(self.meas_a[0])


def simulate_classical_pm(st: ClassicalPMStrategy, scenario: PMScenario) -> PMBehaviour:
    """P(b|xy) = sum_m s(m|x) t(b|m,y); exact when the tables are rational."""
    if st.n_inputs_a != scenario.n_inputs_a or st.n_inputs_b != scenario.n_inputs_b:
        raise ShapeError("strategy tables do not match the scenario")
    probs = tuple(
        tuple(
            tuple(
                sum(st.s[x][mm] * st.t[mm][y][b] for mm in range(st.d))
                for y in range(scenario.n_inputs_b)
            )
            for x in range(scenario.n_inputs_a)
        )
        for b in range(2)
    )
    return PMBehaviour(scenario, probs)


def _clip_probabilities(arr: np.ndarray, what: str) -> np.ndarray:
    im = float(np.max(np.abs(arr.imag)))
    if im > OP_TOL:
        raise StrategyError(f"{what}: imaginary part {im:.3e} exceeds {OP_TOL}")
    real = arr.real
    if float(real.min()) < -OP_TOL or float(real.max()) > 1 + OP_TOL:
        raise StrategyError(f"{what}: probabilities outside [0,1] beyond {OP_TOL} slack")
    return np.clip(real, 0.0, 1.0)


def simulate_quantum_pm(st: QuantumPMStrategy, scenario: PMScenario) -> PMBehaviour:
    """P(b|xy) = tr(rho_x Pi_b^y)."""
    if st.n_inputs_a != scenario.n_inputs_a or st.n_inputs_b != scenario.n_inputs_b:
        raise ShapeError("strategy operators do not match the scenario")
    states = np.stack(st.states)  # (m, d, d)
    povms = np.stack([np.stack(els) for els in st.povms])  # (k, 2, d, d)
    raw = np.einsum("xij,ybji->bxy", states, povms)
    p = _clip_probabilities(raw, "simulated behaviour")
    return PMBehaviour(scenario, tuple(tuple(tuple(float(v) for v in row) for row in plane) for plane in p))


def message_dimension(states: Sequence[np.ndarray], tol: Optional[float] = None) -> int:
    """Dimension of the joint support of a family of density matrices:
    the numerical rank of their sum."""
    arrs = [_frozen_complex(s, f"state {i}") for i, s in enumerate(states)]
    if len({a.shape for a in arrs}) != 1:
        raise ShapeError("states of different sizes")
    for i, a in enumerate(arrs):
        _check_psd(a, f"state {i}")
    total = np.sum(arrs, axis=0)
    eig = np.linalg.eigvalsh(total)
    if tol is None:
        tol = total.shape[0] * float(np.finfo(np.float64).eps)
    top = float(eig[-1])
    if top <= 0:
        return 0
    return int(np.count_nonzero(eig > tol * top))


def simulate_bell(st: BellQuantumStrategy, scenario: BellScenario) -> BellBehaviour:
    """P(ab|xy) = tr(rho (E_a^x tensor F_b^y))."""
    if st.m != scenario.m or st.n != scenario.n:
        raise ShapeError("strategy operators do not match the scenario")
    rho4 = np.asarray(st.state).reshape(st.dA, st.dB, st.dA, st.dB)
    e = np.stack([np.stack(els) for els in st.meas_a])  # (m, n, dA, dA)
    f = np.stack([np.stack(els) for els in st.meas_b])  # (m, n, dB, dB)
    raw = np.einsum("pqrs,xarp,ybsq->abxy", rho4, e, f)
    p = _clip_probabilities(raw, "simulated behaviour")
    probs = tuple(
        tuple(tuple(tuple(float(v) for v in row) for row in plane) for plane in block)
        for block in p
    )
    return BellBehaviour(scenario, probs)


def local_support_dims(st: BellQuantumStrategy, tol: Optional[float] = None) -> tuple[int, int]:
    """Support dimensions of both reduced states of the shared state."""
    rho4 = np.asarray(st.state).reshape(st.dA, st.dB, st.dA, st.dB)
    rho_a = np.einsum("pqrq->pr", rho4)
    rho_b = np.einsum("pqps->qs", rho4)
    return (message_dimension([rho_a], tol), message_dimension([rho_b], tol))


def direct_sum_mixture(st1: BellQuantumStrategy, st2: BellQuantumStrategy,
                       lam: float) -> BellQuantumStrategy:
    """Strategy on summed local spaces realizing lam B1 + (1-lam) B2.

    The state is the weighted direct sum embedded in the tensor product of the
    summed local spaces; measurement operators are block-diagonal direct sums,
    so cross blocks never fire and the behaviour is the exact mixture.
    """
    if st1.m != st2.m or st1.n != st2.n:
        raise ShapeError("strategies live in different scenarios")
    if not 0 < lam < 1:
        raise ShapeError(f"mixing weight {lam} outside (0, 1)")
    da, db = st1.dA + st2.dA, st1.dB + st2.dB
    rho = np.zeros((da, db, da, db), dtype=complex)
    rho[: st1.dA, : st1.dB, : st1.dA, : st1.dB] = (
        lam * np.asarray(st1.state).reshape(st1.dA, st1.dB, st1.dA, st1.dB))
    rho[st1.dA :, st1.dB :, st1.dA :, st1.dB :] = (
        (1 - lam) * np.asarray(st2.state).reshape(st2.dA, st2.dB, st2.dA, st2.dB))

    def dsum(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
        d1, d2 = e1.shape[0], e2.shape[0]
        out = np.zeros((d1 + d2, d1 + d2), dtype=complex)
        out[:d1, :d1] = e1
        out[d1:, d1:] = e2
        return out

    meas_a = tuple(
        tuple(dsum(e1, e2) for e1, e2 in zip(els1, els2))
        for els1, els2 in zip(st1.meas_a, st2.meas_a)
    )
    meas_b = tuple(
        tuple(dsum(f1, f2) for f1, f2 in zip(els1, els2))
        for els1, els2 in zip(st1.meas_b, st2.meas_b)
    )
    return BellQuantumStrategy(
        dA=da, dB=db, state=rho.reshape(da * db, da * db),
        meas_a=meas_a, meas_b=meas_b,
        metadata={"construction": "direct_sum_mixture", "lam": lam},
    )


# --- sampling ---------------------------------------------------------------


def _ginibre_density(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def _projective_povm(rng: np.random.Generator, d: int, n_out: int) -> tuple:
    # round-robin coarse-graining of a Haar-random orthonormal basis
    u = _haar_unitary(rng, d)
    els = []
    for b in range(n_out):
        e = np.zeros((d, d), dtype=complex)
        for i in range(b, d, n_out):
            v = u[:, i]
            e += np.outer(v, v.conj())
        els.append(e)
    return tuple(els)


def _wishart_povm(rng: np.random.Generator, d: int, n_out: int) -> tuple:
    ws = []
    for _ in range(n_out):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        ws.append(g @ g.conj().T)
    total = np.sum(ws, axis=0)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(vals**-0.5) @ vecs.conj().T
    return tuple(inv_sqrt @ w @ inv_sqrt for w in ws)


def _sample_povm(rng: np.random.Generator, d: int, n_out: int) -> tuple[tuple, str]:
    if n_out > d:
        return _wishart_povm(rng, d, n_out), POVM_LAW_WISHART
    return _projective_povm(rng, d, n_out), POVM_LAW_PROJECTIVE


def sample_classical_pm(d: int, scenario: PMScenario, seed: int) -> ClassicalPMStrategy:
    """Encoder/decoder rows drawn from flat Dirichlet distributions."""
    rng = split_rng(seed)
    s = rng.dirichlet(np.ones(d), size=scenario.n_inputs_a)
    t = rng.dirichlet(np.ones(2), size=(d, scenario.n_inputs_b))
    return ClassicalPMStrategy(
        d=d,
        s=tuple(tuple(float(v) for v in row) for row in s),
        t=tuple(tuple(tuple(float(v) for v in cell) for cell in row) for row in t),
    )


def sample_quantum_pm(d: int, scenario: PMScenario, seed: int) -> QuantumPMStrategy:
    """Ginibre-random states; Haar projective binary measurements coarse-grained
    round-robin, falling back to Wishart POVMs when d < 2 (recorded in metadata)."""
    rng = split_rng(seed)
    states = tuple(_ginibre_density(rng, d) for _ in range(scenario.n_inputs_a))
    povms = []
    laws = set()
    for _ in range(scenario.n_inputs_b):
        els, law = _sample_povm(rng, d, 2)
        povms.append(els)
        laws.add(law)
    return QuantumPMStrategy(
        d=d, states=states, povms=tuple(povms),
        metadata={"povm_law": ",".join(sorted(laws)), "seed": seed},
    )


def sample_bell_strategy(dA: int, dB: int, scenario: BellScenario, seed: int) -> BellQuantumStrategy:
    """Ginibre-random shared state with independently sampled local POVMs."""
    rng = split_rng(seed)
    state = _ginibre_density(rng, dA * dB)
    laws = set()
    meas_a = []
    for _ in range(scenario.m):
        els, law = _sample_povm(rng, dA, scenario.n)
        meas_a.append(els)
        laws.add(law)
    meas_b = []
    for _ in range(scenario.m):
        els, law = _sample_povm(rng, dB, scenario.n)
        meas_b.append(els)
        laws.add(law)
    return BellQuantumStrategy(
        dA=dA, dB=dB, state=state, meas_a=tuple(meas_a), meas_b=tuple(meas_b),
        metadata={"povm_law": ",".join(sorted(laws)), "seed": seed},
    )


def sample_behaviour(scenario, seed: int):
    """Random behaviour, deterministic in the seed.

    PM: every P(0|xy) independent uniform on [0, 1].  Bell: the behaviour of a
    random quantum strategy at local dimension m*n (uniform sampling of the
    no-signaling polytope is out of scope; strategy sampling guarantees
    no-signaling and covers the ambient quantum set natively).
    """
    if isinstance(scenario, PMScenario):
        rng = split_rng(seed)
        p0 = rng.random((scenario.n_inputs_a, scenario.n_inputs_b))
        return PMBehaviour.from_p0(scenario, [[float(v) for v in row] for row in p0])
    if isinstance(scenario, BellScenario):
        d = scenario.m * scenario.n
        return simulate_bell(sample_bell_strategy(d, d, scenario, seed), scenario)
    raise ShapeError(f"unknown scenario type {type(scenario).__name__}")


def deterministic_pm_strategy(d: int, sender: Sequence[int], responder) -> ClassicalPMStrategy:
    """Deterministic strategy: sender map x -> message, responder (m, y) -> bit."""
    s = [[Fraction(int(sender[x] == mm)) for mm in range(d)] for x in range(len(sender))]
    t = [
        [[Fraction(int(responder[mm][y] == b)) for b in range(2)] for y in range(len(responder[mm]))]
        for mm in range(d)
    ]
    return ClassicalPMStrategy(d=d, s=tuple(map(tuple, s)), t=tuple(tuple(map(tuple, row)) for row in t))
