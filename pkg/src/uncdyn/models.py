"""Spin-1/2 precession and the truncated harmonic oscillator.

Each model provides its matrices and preparation state together with closed
forms for the two-time commutator bounds and the single-time uncertainties.
The closed forms are independent of the numerical path in
:mod:`uncdyn.dynamics` and serve as its oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import QuantumSystem, StateVector

MIN_FOCK_DIM = 4


class Observable(str, enum.Enum):
    SX = "Sx"
    SY = "Sy"
    X = "X"
    P = "P"


class ModelKind(str, enum.Enum):
    SPIN = "spin"
    OSCILLATOR = "oscillator"


MODEL_OBSERVABLES = {
    ModelKind.SPIN: (Observable.SX, Observable.SY),
    ModelKind.OSCILLATOR: (Observable.X, Observable.P),
}


class PairError(ValueError):
    pass


@dataclass(frozen=True)
class ObservablePair:
    first: Observable
    second: Observable
    model_kind: ModelKind

    def __post_init__(self):
        object.__setattr__(self, "first", Observable(self.first))
        object.__setattr__(self, "second", Observable(self.second))
        object.__setattr__(self, "model_kind", ModelKind(self.model_kind))
        allowed = MODEL_OBSERVABLES[self.model_kind]
        for obs in (self.first, self.second):
            if obs not in allowed:
                raise PairError(
                    f"observable {obs.value!r} is not defined for the {self.model_kind.value} model"
                )

    @classmethod
    def of(cls, first: str, second: str) -> ObservablePair:
        """Build a pair, inferring the model from the observable names."""
        first, second = Observable(first), Observable(second)
        for kind, allowed in MODEL_OBSERVABLES.items():
            if first in allowed:
                return cls(first, second, kind)
        raise PairError(f"no model defines {first.value!r}")

    @property
    def same(self) -> bool:
        return self.first is self.second

    @property
    def label(self) -> str:
        return f"{self.first.value},{self.second.value}"

    def _require(self, kind: ModelKind) -> None:
        if self.model_kind is not kind:
            raise PairError(f"pair ({self.label}) is not a {kind.value} pair")


# --- spin-1/2 ---------------------------------------------------------------


@dataclass(frozen=True)
class SpinModel:
    omega: float = 1.0
    hbar: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def sz_expectation(self) -> float:
        return 0.5 * self.hbar * math.cos(self.theta)


def spin_operators(hbar: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(S_x, S_y, S_z)`` as ``hbar/2`` times the Pauli matrices."""
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    half = 0.5 * hbar
    sx = half * np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = half * np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = half * np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return sx, sy, sz


def spin_state(theta: float) -> StateVector:
    """``cos(theta/2)|up> + sin(theta/2)|down>``."""
    return StateVector(np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=np.complex128))


def spin_system(model: SpinModel) -> QuantumSystem:
    _, _, sz = spin_operators(model.hbar)
    return QuantumSystem(model.omega * sz, model.hbar)


def spin_observable(which: Observable | str, hbar: float = 1.0) -> np.ndarray:
    sx, sy, _ = spin_operators(hbar)
    which = Observable(which)
    if which is Observable.SX:
        return sx
    if which is Observable.SY:
        return sy
    raise PairError(f"{which.value!r} is not a spin observable")


class AnalyticCommutator(NamedTuple):
    """Closed-form two-time commutator ``coefficient * S_z``."""

    coefficient: complex
    operator: str = "Sz"

    def matrix(self, hbar: float) -> np.ndarray:
        return self.coefficient * spin_operators(hbar)[2]


def spin_analytic_commutator(
    pair: ObservablePair, t1: float, t2: float, model: SpinModel
) -> AnalyticCommutator:
    pair._require(ModelKind.SPIN)
    phase = model.omega * (t2 - t1)
    ih = 1j * model.hbar
    if pair.same:
        return AnalyticCommutator(-ih * math.sin(phase))
    sign = 1.0 if pair.first is Observable.SX else -1.0
    return AnalyticCommutator(sign * ih * math.cos(phase))


def spin_analytic_bound(pair: ObservablePair, t1: float, t2: float, model: SpinModel) -> float:
    pair._require(ModelKind.SPIN)
    phase = model.omega * (t2 - t1)
    trig = math.sin(phase) if pair.same else math.cos(phase)
    return 0.5 * model.hbar * abs(trig * model.sz_expectation)


def spin_analytic_variance(which: Observable | str, t: float, model: SpinModel) -> float:
    """Uncertainty of ``S_x(t)`` or ``S_y(t)`` in the state ``spin_state(model.theta)``."""
    which = Observable(which)
    wt = model.omega * t
    if which is Observable.SX:
        trig = math.cos(wt)
    elif which is Observable.SY:
        trig = math.sin(wt)
    else:
        raise PairError(f"{which.value!r} is not a spin observable")
    s = math.sin(model.theta)
    return 0.5 * model.hbar * math.sqrt(max(1.0 - s * s * trig * trig, 0.0))


# --- harmonic oscillator ----------------------------------------------------


@dataclass(frozen=True)
class OscillatorModel:
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    fock_dim: int = 16

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < MIN_FOCK_DIM:
            raise ValueError(f"fock_dim must be an integer >= {MIN_FOCK_DIM}, got {self.fock_dim}")

    @property
    def length_scale_sq(self) -> float:
        """``hbar / (m omega)``."""
        return self.hbar / (self.mass * self.omega)

    @property
    def momentum_scale_sq(self) -> float:
        """``m hbar omega``."""
        return self.mass * self.hbar * self.omega


def lowering_operator(dim: int) -> np.ndarray:
    """Truncated ``a`` with ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(np.complex128)


def oscillator_operators(model: OscillatorModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(X, P, H)`` in the truncated number basis.

    ``H`` is assembled from ``P^2/2m + m omega^2 X^2/2`` with truncated
    products, so its top level carries the truncation error instead of the
    ideal ``hbar omega (N - 1/2)``.
    """
    a = lowering_operator(model.fock_dim)
    ad = a.conj().T
    x = math.sqrt(model.length_scale_sq / 2) * (a + ad)
    p = 1j * math.sqrt(model.momentum_scale_sq / 2) * (ad - a)
    h = p @ p / (2 * model.mass) + 0.5 * model.mass * model.omega**2 * (x @ x)
    return x, p, h


def oscillator_state(model: OscillatorModel) -> StateVector:
    """``(|0> + |1>)/sqrt(2)``."""
    amps = np.zeros(model.fock_dim, dtype=np.complex128)
    amps[:2] = 1 / math.sqrt(2)
    return StateVector(amps)


def oscillator_system(model: OscillatorModel) -> QuantumSystem:
    return QuantumSystem(oscillator_operators(model)[2], model.hbar)


def oscillator_observable(which: Observable | str, model: OscillatorModel) -> np.ndarray:
    x, p, _ = oscillator_operators(model)
    which = Observable(which)
    if which is Observable.X:
        return x
    if which is Observable.P:
        return p
    raise PairError(f"{which.value!r} is not an oscillator observable")


def oscillator_analytic_bound(
    pair: ObservablePair, t1: float, t2: float, model: OscillatorModel
) -> float:
    pair._require(ModelKind.OSCILLATOR)
    phase = model.omega * (t2 - t1)
    if not pair.same:
        return 0.5 * model.hbar * abs(math.cos(phase))
    if pair.first is Observable.X:
        return 0.5 * model.length_scale_sq * abs(math.sin(phase))
    return 0.5 * model.momentum_scale_sq * abs(math.sin(phase))


def oscillator_analytic_variance(which: Observable | str, t: float, model: OscillatorModel) -> float:
    """Uncertainty of ``X(t)`` or ``P(t)`` in the state ``oscillator_state(model)``."""
    which = Observable(which)
    wt = model.omega * t
    if which is Observable.X:
        return math.sqrt(0.5 * model.length_scale_sq * (2 - math.cos(wt) ** 2))
    if which is Observable.P:
        return math.sqrt(0.5 * model.momentum_scale_sq * (2 - math.sin(wt) ** 2))
    raise PairError(f"{which.value!r} is not an oscillator observable")


def small_delta_limit_bound(
    pair: ObservablePair, t1: float, t2: float, model: SpinModel | OscillatorModel
) -> float:
    """Leading-order bound for nearby measurement times.

    Defined for ``(Sx, Sx)`` and ``(X, X)`` (where the sine is linearized) and
    for cross pairs at equal times (the equal-time Robertson bound).
    """
    dt = t2 - t1
    if isinstance(model, SpinModel):
        pair._require(ModelKind.SPIN)
        if pair.same and pair.first is Observable.SX:
            return 0.5 * model.hbar * abs(model.omega * dt * model.sz_expectation)
        if not pair.same and dt == 0:
            return 0.5 * model.hbar * abs(model.sz_expectation)
    elif isinstance(model, OscillatorModel):
        pair._require(ModelKind.OSCILLATOR)
        if pair.same and pair.first is Observable.X:
            return 0.5 * model.hbar / model.mass * abs(dt)
        if not pair.same and dt == 0:
            return 0.5 * model.hbar
    else:
        raise TypeError(f"unsupported model {type(model).__name__}")
    raise PairError(f"no small-interval limit for pair ({pair.label}) at dt={dt}")
