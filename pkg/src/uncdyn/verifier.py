"""Grid sweeps of the two-time uncertainty relation and their cross-checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .dynamics import (
    QuantumSystem,
    StateVector,
    TwoTimeUncertaintyRecord,
    evolve_observable,
    heisenberg_rhs,
    record_from_evolved,
)
from .linalg import as_matrix, max_abs, require_hermitian
from .models import (
    ModelKind,
    ObservablePair,
    OscillatorModel,
    SpinModel,
    oscillator_analytic_bound,
    oscillator_analytic_variance,
    oscillator_observable,
    oscillator_state,
    oscillator_system,
    spin_analytic_bound,
    spin_analytic_variance,
    spin_observable,
    spin_state,
    spin_system,
)

DEFAULT_INEQ_TOL = 1e-12
DEFAULT_ORACLE_TOL = 1e-10


class ScenarioError(ValueError):
    pass


class OracleUnavailableError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Arithmetic sequence with inclusive endpoints; ``count == 1`` is ``[start]``."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ScenarioError(f"grid count must be a positive integer, got {self.count}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ScenarioError("grid endpoints must be finite")

    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class Tolerances:
    ineq: float = DEFAULT_INEQ_TOL
    oracle: float = DEFAULT_ORACLE_TOL

    def __post_init__(self):
        for name in ("ineq", "oracle"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ScenarioError(f"tolerance {name!r} must be positive, got {value}")


@dataclass(frozen=True)
class FDCheckSettings:
    """Points for the Heisenberg-equation finite-difference check.

    ``times=None`` means the points of the scenario's ``t1_grid``.
    """

    times: Optional[tuple[float, ...]] = None
    step: float = 1e-4
    threshold: float = 1e-7


@dataclass(frozen=True, eq=False)
class CustomModel:
    hamiltonian: np.ndarray
    observable_a: np.ndarray
    observable_b: np.ndarray
    state: StateVector
    hbar: float = 1.0

    def __post_init__(self):
        dim = self.state.dim
        for name in ("hamiltonian", "observable_a", "observable_b"):
            m = require_hermitian(getattr(self, name), name)
            if m.shape[0] != dim:
                raise ScenarioError(f"{name} has dimension {m.shape[0]}, state has {dim}")
            object.__setattr__(self, name, m)


Model = Union[SpinModel, OscillatorModel, CustomModel]
Oracle = Callable[[float, float], "tuple[float, float]"]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A model, an observable pair, a time grid and the tolerances to judge it by.

    For the oscillator, ``state_amplitudes`` replaces the default
    ``(|0> + |1>)/sqrt(2)``; it must have no weight above level
    ``fock_dim - 3``, which is as far as the truncated dynamics stays exact
    for the second moments. Non-default states get no analytic oracle.
    """

    model: Model
    t1_grid: Grid
    t2_grid: Grid
    pair: Optional[ObservablePair] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    state_amplitudes: Optional[np.ndarray] = None
    fdcheck: FDCheckSettings = field(default_factory=FDCheckSettings)

    def __post_init__(self):
        kind = self.model_kind
        if kind == "custom":
            if self.pair is not None:
                raise ScenarioError("custom scenarios take matrices, not an observable pair")
            if self.state_amplitudes is not None:
                raise ScenarioError("custom scenarios carry their state in the model")
            return
        if self.pair is None:
            raise ScenarioError(f"{kind} scenario needs an observable pair")
        if self.pair.model_kind.value != kind:
            raise ScenarioError(f"pair ({self.pair.label}) does not belong to the {kind} model")
        if self.state_amplitudes is not None:
            if kind != "oscillator":
                raise ScenarioError("explicit amplitudes are only accepted for the oscillator")
            amps = np.asarray(self.state_amplitudes, dtype=np.complex128)
            n = self.model.fock_dim
            if amps.ndim != 1 or amps.size > n:
                raise ScenarioError(f"oscillator state needs at most {n} amplitudes")
            padded = np.zeros(n, dtype=np.complex128)
            padded[: amps.size] = amps
            top = np.nonzero(padded)[0]
            if top.size and top[-1] > n - 3:
                raise ScenarioError(
                    f"oscillator state has weight on level {top[-1]}; "
                    f"levels above fock_dim - 3 = {n - 3} are not exact under truncation"
                )
            try:
                StateVector(padded)
            except ValueError as exc:
                raise ScenarioError(f"oscillator state: {exc}") from None
            object.__setattr__(self, "state_amplitudes", padded)

    @property
    def model_kind(self) -> str:
        if isinstance(self.model, SpinModel):
            return ModelKind.SPIN.value
        if isinstance(self.model, OscillatorModel):
            return ModelKind.OSCILLATOR.value
        return "custom"

    def build(self) -> tuple[QuantumSystem, np.ndarray, np.ndarray, StateVector, Optional[Oracle]]:
        """Materialize ``(system, A, B, state, oracle)``; ``oracle`` is None without a closed form."""
        model = self.model
        if isinstance(model, CustomModel):
            sys = QuantumSystem(model.hamiltonian, model.hbar)
            return sys, model.observable_a, model.observable_b, model.state, None

        pair = self.pair
        if isinstance(model, SpinModel):
            sys = spin_system(model)
            a = spin_observable(pair.first, model.hbar)
            b = spin_observable(pair.second, model.hbar)
            psi = spin_state(model.theta)

            def oracle(t1, t2):
                lhs = spin_analytic_variance(pair.first, t1, model) * spin_analytic_variance(
                    pair.second, t2, model
                )
                return lhs, spin_analytic_bound(pair, t1, t2, model)

            return sys, a, b, psi, oracle

        sys = oscillator_system(model)
        a = oscillator_observable(pair.first, model)
        b = oscillator_observable(pair.second, model)
        default = oscillator_state(model)
        if self.state_amplitudes is None or np.array_equal(
            self.state_amplitudes, default.amplitudes
        ):
            psi = default

            def oracle(t1, t2):
                lhs = oscillator_analytic_variance(
                    pair.first, t1, model
                ) * oscillator_analytic_variance(pair.second, t2, model)
                return lhs, oscillator_analytic_bound(pair, t1, t2, model)

            return sys, a, b, psi, oracle
        return sys, a, b, StateVector(self.state_amplitudes), None


@dataclass
class SweepReport:
    """Records in canonical order (``t1`` major, then ``t2``) plus summaries.

    ``analytic_lhs``/``analytic_rhs`` are None when the scenario has no closed
    form. ``violations`` holds ``(i, j)`` grid indices whose slack is below
    ``-ineq_tol``.
    """

    records: list[TwoTimeUncertaintyRecord]
    shape: tuple[int, int]
    ineq_tol: float
    oracle_tol: float
    analytic_lhs: Optional[np.ndarray] = None
    analytic_rhs: Optional[np.ndarray] = None
    max_oracle_error: Optional[float] = None
    min_slack: float = math.inf
    violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def has_oracle(self) -> bool:
        return self.analytic_lhs is not None

    def grid_index(self, k: int) -> tuple[int, int]:
        return divmod(k, self.shape[1])


def run_sweep(scenario: Scenario, max_workers: Optional[int] = None) -> SweepReport:
    """Evaluate the uncertainty record on every ``(t1, t2)`` grid point.

    With ``max_workers`` the grid rows are evaluated on a thread pool; the
    report is identical to the serial one.
    """
    sys, a, b, psi, oracle = scenario.build()
    t1s = scenario.t1_grid.points()
    t2s = scenario.t2_grid.points()
    a_cache = [evolve_observable(sys, a, t) for t in t1s]
    b_cache = [evolve_observable(sys, b, t) for t in t2s]

    def row(i: int) -> list[TwoTimeUncertaintyRecord]:
        return [
            record_from_evolved(psi, a_cache[i], b_cache[j], t1s[i], t2s[j])
            for j in range(len(t2s))
        ]

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(row, range(len(t1s))))
    else:
        rows = [row(i) for i in range(len(t1s))]
    records = [r for rs in rows for r in rs]

    tol = scenario.tolerances
    report = SweepReport(
        records=records,
        shape=(len(t1s), len(t2s)),
        ineq_tol=tol.ineq,
        oracle_tol=tol.oracle,
    )
    if records:
        slacks = np.array([r.slack for r in records])
        report.min_slack = float(slacks.min())
        report.violations = [report.grid_index(k) for k in np.nonzero(slacks < -tol.ineq)[0]]
    if oracle is not None:
        analytic = np.array([oracle(r.t1, r.t2) for r in records], dtype=float).reshape(-1, 2)
        report.analytic_lhs = analytic[:, 0]
        report.analytic_rhs = analytic[:, 1]
        if records:
            report.max_oracle_error = max(compare_numeric_analytic(report))
    return report


class OracleErrors(NamedTuple):
    lhs_err: float
    rhs_err: float


def compare_numeric_analytic(report: SweepReport) -> OracleErrors:
    if not report.has_oracle:
        raise OracleUnavailableError("report has no analytic columns")
    if not report.records:
        raise OracleUnavailableError("report has no records to compare")
    lhs = np.array([r.lhs for r in report.records])
    rhs = np.array([r.rhs for r in report.records])
    return OracleErrors(
        float(np.max(np.abs(lhs - report.analytic_lhs))),
        float(np.max(np.abs(rhs - report.analytic_rhs))),
    )


class InequalityCheck(NamedTuple):
    passed: bool
    violations: list[tuple[int, float, float]]
    """``(record index, t1, t2)`` for each offending record."""


def check_inequality(report: SweepReport, tol: float = DEFAULT_INEQ_TOL) -> InequalityCheck:
    bad = [(k, r.t1, r.t2) for k, r in enumerate(report.records) if r.slack < -tol]
    return InequalityCheck(not bad, bad)


def finite_difference_check(sys: QuantumSystem, a, t: float, h: float) -> float:
    """Max-norm gap between a central difference of ``A(t)`` and the Heisenberg equation."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    a = as_matrix(a, "observable")
    deriv = (evolve_observable(sys, a, t + h) - evolve_observable(sys, a, t - h)) / (2 * h)
    return max_abs(deriv - heisenberg_rhs(sys, a, t))
