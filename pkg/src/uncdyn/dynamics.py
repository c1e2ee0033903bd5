"""Heisenberg-picture evolution, moments and two-time uncertainty records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import (
    DimensionError,
    EigenDecomposition,
    anticommutator,
    as_matrix,
    commutator,
    hermitian_eigendecomposition,
    require_hermitian,
)

NORM_TOL = 1e-12
RADICAND_FLOOR = -1e-12


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that must be non-negative or real came out clearly otherwise."""


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    """A time-independent Hamiltonian together with the value of hbar.

    The spectral decomposition of the Hamiltonian is computed once at
    construction, so each evolution afterwards costs a few dense products.
    """

    hamiltonian: np.ndarray
    hbar: float = 1.0
    spectrum: EigenDecomposition = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        h = require_hermitian(self.hamiltonian, "hamiltonian")
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "spectrum", hermitian_eigendecomposition(h))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def propagator(self, t: float) -> np.ndarray:
        """``exp(-i H t / hbar)``."""
        return self.spectrum.unitary(-t / self.hbar)

    def evolve(self, a: np.ndarray, t: float) -> np.ndarray:
        return self.spectrum.conjugate(t / self.hbar, a)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"state must be a non-empty vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> StateVector:
        amps = np.asarray(amplitudes, dtype=np.complex128)
        return cls(amps / np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def _check_dims(n: int, *mats: np.ndarray) -> None:
    for m in mats:
        if m.shape != (n, n):
            raise DimensionError(f"operator of shape {m.shape} does not act on dimension {n}")


def evolve_observable(sys: QuantumSystem, a, t: float) -> np.ndarray:
    """Heisenberg-picture observable ``A(t) = exp(iHt/hbar) A exp(-iHt/hbar)``."""
    a = require_hermitian(a, "observable")
    _check_dims(sys.dim, a)
    return sys.evolve(a, t)


def expectation(psi: StateVector, a) -> complex:
    a = as_matrix(a, "operator")
    _check_dims(psi.dim, a)
    v = psi.amplitudes
    return complex(np.vdot(v, a @ v))


def fluctuation_operator(psi: StateVector, a_t) -> np.ndarray:
    """``A - <A> I`` for Hermitian ``A``; its expectation in ``psi`` vanishes."""
    a_t = require_hermitian(a_t, "observable")
    mean = expectation(psi, a_t).real
    return a_t - mean * np.eye(a_t.shape[0])


def uncertainty(psi: StateVector, a_t: np.ndarray) -> float:
    """Standard deviation of an already-evolved Hermitian observable.

    The value is ``||(A - <A>) psi||``, the second moment of the fluctuation
    operator; unlike ``<A^2> - <A>^2`` it keeps full relative accuracy when the
    state is close to an eigenvector. The raw-moment radicand is still formed
    as a consistency check: below -1e-12 the input cannot be a valid
    observable and an error is raised.
    """
    _check_dims(psi.dim, a_t)
    v = psi.amplitudes
    av = a_t @ v
    mean = np.vdot(v, av).real
    radicand = np.vdot(v, a_t @ av).real - mean * mean
    if radicand < RADICAND_FLOOR:
        raise NumericalInconsistencyError(f"negative variance {radicand:.3e}")
    return float(np.linalg.norm(av - mean * v))


def variance(psi: StateVector, sys: QuantumSystem, a, t: float) -> float:
    """Uncertainty ``Delta A(t)`` of observable ``a`` in ``psi`` at time ``t``.

    Note that, following common usage, this is the standard deviation, not its
    square.
    """
    return uncertainty(psi, evolve_observable(sys, a, t))


def two_time_commutator(sys: QuantumSystem, a, t1: float, b, t2: float) -> np.ndarray:
    return commutator(evolve_observable(sys, a, t1), evolve_observable(sys, b, t2))


def heisenberg_rhs(sys: QuantumSystem, a, t: float) -> np.ndarray:
    """Right-hand side of the Heisenberg equation, ``[A(t), H] / (i hbar)``."""
    a_t = evolve_observable(sys, a, t)
    return commutator(a_t, sys.hamiltonian) / (1j * sys.hbar)


class SchwarzTerms(NamedTuple):
    product_sq: float
    commutator_term: float
    anticommutator_term: float


def schwarz_terms(psi: StateVector, a_t: np.ndarray, b_t: np.ndarray) -> SchwarzTerms:
    """Split ``|<dA dB>|^2`` into its commutator and anticommutator parts.

    ``a_t`` and ``b_t`` are already-evolved Hermitian observables.
    """
    da = fluctuation_operator(psi, a_t)
    db = fluctuation_operator(psi, b_t)
    comm = expectation(psi, commutator(a_t, b_t))
    anti = expectation(psi, anticommutator(da, db))
    scale = max(1.0, abs(comm), abs(anti))
    if abs(comm.real) > 1e-12 * scale:
        raise NumericalInconsistencyError(f"commutator expectation not imaginary: {comm}")
    if abs(anti.imag) > 1e-12 * scale:
        raise NumericalInconsistencyError(f"anticommutator expectation not real: {anti}")
    var_a = uncertainty(psi, a_t) ** 2
    var_b = uncertainty(psi, b_t) ** 2
    return SchwarzTerms(
        product_sq=var_a * var_b,
        commutator_term=0.25 * abs(comm) ** 2,
        anticommutator_term=0.25 * abs(anti) ** 2,
    )


def schwarz_decomposition(
    psi: StateVector, sys: QuantumSystem, a, t1: float, b, t2: float
) -> SchwarzTerms:
    return schwarz_terms(psi, evolve_observable(sys, a, t1), evolve_observable(sys, b, t2))


@dataclass(frozen=True)
class TwoTimeUncertaintyRecord:
    t1: float
    t2: float
    delta_a_t1: float
    delta_b_t2: float
    lhs: float
    commutator_expectation: complex
    rhs: float
    slack: float


def record_from_evolved(
    psi: StateVector, a_t1: np.ndarray, b_t2: np.ndarray, t1: float, t2: float
) -> TwoTimeUncertaintyRecord:
    """Build a record from observables already evolved to ``t1`` and ``t2``."""
    da = uncertainty(psi, a_t1)
    db = uncertainty(psi, b_t2)
    comm = expectation(psi, a_t1 @ b_t2 - b_t2 @ a_t1)
    lhs = da * db
    rhs = 0.5 * abs(comm)
    return TwoTimeUncertaintyRecord(
        t1=float(t1),
        t2=float(t2),
        delta_a_t1=da,
        delta_b_t2=db,
        lhs=lhs,
        commutator_expectation=comm,
        rhs=rhs,
        slack=lhs - rhs,
    )


def uncertainty_record(
    psi: StateVector, sys: QuantumSystem, a, t1: float, b, t2: float
) -> TwoTimeUncertaintyRecord:
    """Evaluate both sides of ``dA(t1) dB(t2) >= |<[A(t1), B(t2)]>| / 2``."""
    _check_dims(sys.dim, as_matrix(a), as_matrix(b))
    if psi.dim != sys.dim:
        raise DimensionError(f"state dimension {psi.dim} != system dimension {sys.dim}")
    return record_from_evolved(
        psi, evolve_observable(sys, a, t1), evolve_observable(sys, b, t2), t1, t2
    )
