"""Heisenberg-picture dynamics and two-time uncertainty relations for small quantum systems."""

from .dynamics import (
    QuantumSystem,
    StateVector,
    TwoTimeUncertaintyRecord,
    evolve_observable,
    expectation,
    fluctuation_operator,
    heisenberg_rhs,
    schwarz_decomposition,
    two_time_commutator,
    uncertainty_record,
    variance,
)
from .linalg import (
    EigenDecomposition,
    adjoint,
    anticommutator,
    commutator,
    hermitian_eigendecomposition,
    mat_mul,
    unitary_conjugation_exponential,
)
from .models import (
    ObservablePair,
    OscillatorModel,
    SpinModel,
    oscillator_operators,
    oscillator_state,
    spin_operators,
    spin_state,
)
from .verifier import Grid, Scenario, SweepReport, Tolerances, run_sweep

__version__ = "0.1.0"
