"""Magic dynamics under random Pauli-frame measurements.

Dense-statevector simulator plus the matching Markov/mean-field model for
how stabilizer nullity and stabilizer Renyi entropy evolve when a state is
repeatedly measured in random Clifford-conjugated bases, optionally with a
magic-pumping rotation dialed in.
"""

from .harness import (
    EnsembleSummary,
    ExperimentConfig,
    FitResult,
    ObservableStats,
    TrajectoryRecord,
    checkpoint_schedule,
    default_fit_guess,
    fit_least_squares,
    fit_model_curve,
    mix_seed,
    rare_event_scan,
    run_ensemble,
    run_trajectory,
    steady_state_estimate,
    summarize_records,
    time_averaged_std,
)
from .limits import CapExceededError
from .model import (
    ModelParams,
    NullityDistribution,
    W_FIXED_POINT,
    analytic_y,
    convergence_time,
    m2_haar,
    markov_evolve,
    nullity_asymptotics,
    pr_f,
    pr_r_keep,
    pr_z_decay,
    steady_state_distribution,
    transition_matrix,
    w_ode_rhs,
    w_update_exact,
)
from .pauli import (
    MeasurementFrame,
    PauliString,
    StabilizerGroup,
    commutes,
    multiply,
    pauli_action,
    sample_frame,
    sample_nonidentity_pauli,
)
from .spectrum import (
    MagicReport,
    NullityResolutionError,
    PauliSpectrum,
    brute_force_spectrum,
    magic_report,
    nullity,
    pauli_spectrum,
    sre,
    sre_additivity_check,
)
from .state import (
    MeasurementOutcome,
    StateVector,
    ZeroProbabilityError,
    apply_pauli,
    apply_pauli_rotation,
    branch_probabilities,
    entanglement_entropy,
    gue_state,
    haar_state,
    measure_frame,
    pauli_expectation,
    project_pauli,
    t_product_state,
    zero_state,
)

__version__ = "0.1.0"
