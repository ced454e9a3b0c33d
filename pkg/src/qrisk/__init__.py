"""Statevector simulation of random-injection and strike-gated payoff
circuits, with exact, shot-based and maximum-likelihood QAE estimators."""

from .circuits import (
    BooleanThreadFunction,
    PriceDistribution,
    RegisterLayout,
    build_grover_operator,
    build_lm_rotations,
    build_payoff_circuit,
    build_pf_switch,
    build_random_injection,
    build_thread_function,
    build_thread_superposition,
    even16,
    injection_layout,
    load_distribution,
    payoff_layout,
    shift_distribution,
)
from .estimators import (
    ConvergencePoint,
    MLAEConfig,
    convergence_experiment,
    exact_amplitude,
    grid_sampling_exact,
    mc_random_injection,
    mlae_estimate,
)
from .payoff import (
    CalibrationMode,
    EstimateReport,
    PayoffParams,
    compute_lm_reference,
    compute_pf_reference,
    flip_error_statistic,
    payoff_report,
    value_map,
)
from .sim import (
    Circuit,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate,
    basis_probabilities,
    marginal_probability,
    new_state,
    sample_shots,
)

__version__ = "0.1.0"
