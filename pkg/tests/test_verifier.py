import dataclasses
import math

import numpy as np
import pytest

from uncdyn.dynamics import StateVector
from uncdyn.models import ObservablePair, OscillatorModel, SpinModel, oscillator_observable, oscillator_system
from uncdyn.verifier import (
    CustomModel,
    Grid,
    OracleUnavailableError,
    Scenario,
    ScenarioError,
    Tolerances,
    check_inequality,
    compare_numeric_analytic,
    finite_difference_check,
    run_sweep,
)
from uncdyn.models import spin_operators, spin_system

from .conftest import random_hermitian, random_state

TWO_PI = 2 * math.pi


def spin_scenario(first="Sx", second="Sy", theta=0.0, count=1, stop=0.0):
    grid = Grid(0.0, stop, count)
    return Scenario(
        model=SpinModel(omega=1.0, hbar=1.0, theta=theta),
        pair=ObservablePair.of(first, second),
        t1_grid=grid,
        t2_grid=grid,
    )


def custom_scenario(seed=3, n=3, count=4):
    rng = np.random.default_rng(seed)
    model = CustomModel(
        hamiltonian=random_hermitian(rng, n),
        observable_a=random_hermitian(rng, n),
        observable_b=random_hermitian(rng, n),
        state=StateVector(random_state(rng, n)),
    )
    return Scenario(model=model, t1_grid=Grid(0, 2, count), t2_grid=Grid(-1, 1, count))


def test_grid_points():
    np.testing.assert_array_equal(Grid(0.0, 1.0, 5).points(), [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(Grid(3.0, 9.0, 1).points(), [3.0])
    with pytest.raises(ScenarioError):
        Grid(0.0, 1.0, 0)


def test_tolerances_must_be_positive():
    with pytest.raises(ScenarioError):
        Tolerances(ineq=0.0)
    with pytest.raises(ScenarioError):
        Tolerances(oracle=-1.0)


def test_single_point_equality():
    report = run_sweep(spin_scenario())
    assert len(report.records) == 1
    assert report.records[0].slack == 0.0
    assert report.violations == []


def test_spin_grid_sweep():
    report = run_sweep(spin_scenario(theta=math.pi / 3, count=21, stop=TWO_PI))
    assert len(report.records) == 441
    assert report.violations == []
    # t1-major ordering
    pts = Grid(0.0, TWO_PI, 21).points()
    assert [(r.t1, r.t2) for r in report.records[:3]] == [(0.0, pts[0]), (0.0, pts[1]), (0.0, pts[2])]
    assert report.records[21].t1 == pts[1]
    lhs_err, rhs_err = compare_numeric_analytic(report)
    assert lhs_err <= 1e-12 and rhs_err <= 1e-12
    assert report.max_oracle_error == max(lhs_err, rhs_err)


def test_oscillator_position_grid():
    grid = Grid(0.0, TWO_PI, 21)
    report = run_sweep(
        Scenario(OscillatorModel(), grid, grid, pair=ObservablePair.of("X", "X"))
    )
    assert report.min_slack >= 0
    for r in report.records:
        if r.t1 == r.t2:
            assert r.rhs == 0.0
    assert max(compare_numeric_analytic(report)) <= 1e-10


def test_compare_requires_oracle_and_records():
    with pytest.raises(OracleUnavailableError):
        compare_numeric_analytic(run_sweep(custom_scenario()))
    report = run_sweep(spin_scenario())
    empty = dataclasses.replace(report, records=[], analytic_lhs=np.array([]), analytic_rhs=np.array([]))
    with pytest.raises(OracleUnavailableError):
        compare_numeric_analytic(empty)


def test_custom_report_has_no_oracle_columns():
    report = run_sweep(custom_scenario())
    assert report.analytic_lhs is None and report.analytic_rhs is None
    assert report.max_oracle_error is None
    assert len(report.records) == 16
    assert report.violations == []


def test_check_inequality():
    report = run_sweep(spin_scenario(theta=1.0, count=5, stop=3.0))
    assert check_inequality(report, 1e-12) == (True, [])
    corrupted = list(report.records)
    corrupted[7] = dataclasses.replace(corrupted[7], slack=-1.0)
    result = check_inequality(dataclasses.replace(report, records=corrupted), 1e-12)
    assert not result.passed
    assert result.violations == [(7, corrupted[7].t1, corrupted[7].t2)]
    assert check_inequality(dataclasses.replace(report, records=[]), 1e-12).passed


def test_violations_iff_negative_slack():
    for scenario in (spin_scenario(theta=0.7, count=7, stop=5.0), custom_scenario()):
        report = run_sweep(scenario)
        assert bool(report.violations) == (report.min_slack < -report.ineq_tol)


def test_oscillator_state_support_rule():
    grid = Grid(0, 1, 2)
    pair = ObservablePair.of("X", "P")
    ok = np.zeros(4)
    ok[1] = 1.0
    Scenario(OscillatorModel(fock_dim=4), grid, grid, pair=pair, state_amplitudes=ok)
    bad = np.zeros(4)
    bad[2] = 1.0
    with pytest.raises(ScenarioError, match="level 2"):
        Scenario(OscillatorModel(fock_dim=4), grid, grid, pair=pair, state_amplitudes=bad)
    with pytest.raises(ScenarioError, match="normalized"):
        Scenario(OscillatorModel(fock_dim=8), grid, grid, pair=pair, state_amplitudes=np.ones(3))


def test_oscillator_custom_state_has_no_oracle():
    grid = Grid(0, 1, 3)
    amps = np.array([0.6, 0.0, 0.8])
    report = run_sweep(
        Scenario(OscillatorModel(), grid, grid, pair=ObservablePair.of("X", "P"), state_amplitudes=amps)
    )
    assert not report.has_oracle
    assert report.violations == []
    # explicitly passing the default state keeps the oracle
    default = np.array([1, 1]) / math.sqrt(2)
    report = run_sweep(
        Scenario(OscillatorModel(), grid, grid, pair=ObservablePair.of("X", "P"), state_amplitudes=default)
    )
    assert report.has_oracle


def test_scenario_consistency_checks():
    grid = Grid(0, 1, 1)
    with pytest.raises(ScenarioError):
        Scenario(SpinModel(), grid, grid)
    with pytest.raises(ScenarioError):
        Scenario(SpinModel(), grid, grid, pair=ObservablePair.of("X", "P"))
    scenario = custom_scenario()
    with pytest.raises(ScenarioError):
        dataclasses.replace(scenario, pair=ObservablePair.of("Sx", "Sy"))


def test_custom_model_validation():
    psi = StateVector(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        CustomModel(np.array([[0, 1], [0, 0]]), np.eye(2), np.eye(2), psi)
    with pytest.raises(ScenarioError):
        CustomModel(np.eye(3), np.eye(3), np.eye(3), psi)


def test_determinism_and_parallel_ordering():
    scenario = spin_scenario(theta=0.9, count=11, stop=TWO_PI)
    first, second = run_sweep(scenario), run_sweep(scenario)
    threaded = run_sweep(scenario, max_workers=4)
    assert first.records == second.records == threaded.records
    np.testing.assert_array_equal(first.analytic_lhs, threaded.analytic_lhs)
    assert first.min_slack == threaded.min_slack


def test_finite_difference_examples():
    sx, sy, sz = spin_operators(1.0)
    sys = spin_system(SpinModel())
    # a conserved observable has no truncation error, only rounding ~ eps / h
    for h in (1e-2, 1e-4):
        assert finite_difference_check(sys, sz, 1.3, h) <= 10 * np.finfo(float).eps / h
    assert finite_difference_check(sys, sx, 0.7, 1e-4) <= 1e-7
    ratio = finite_difference_check(sys, sx, 0.7, 1e-3) / finite_difference_check(sys, sx, 0.7, 5e-4)
    assert 3.5 <= ratio <= 4.5
    with pytest.raises(ValueError):
        finite_difference_check(sys, sx, 0.7, 0.0)


def test_finite_difference_oscillator_truncation_artifact():
    # At N = 16 the defect is dominated by the (N-2, N-1) element, whose phase
    # rotates at the spurious frequency E_{N-2} - E_{N-1} = (N - 2) omega / 2.
    n, h, t = 16, 1e-4, 0.7
    model = OscillatorModel(fock_dim=n)
    sys = oscillator_system(model)
    x = oscillator_observable("X", model)
    freq = (n - 2) / 2
    predicted = h**2 / 6 * math.sqrt((n - 1) / 2) * freq**3
    defect = finite_difference_check(sys, x, t, h)
    assert defect == pytest.approx(predicted, rel=1e-3)
    assert defect > 1e-7
