"""Off-the-grid tracking of jumping point sources.

Reconstructs sparse time-dependent point sources from blurred sensor data by
a fully-corrective conditional gradient method over cadlag trace vectors with
mass plus Wasserstein-1 essential-variation regularization.
"""

from .core import (
    Atom,
    AscentConfig,
    CadlagSamples,
    CoeffConfig,
    Domain1D,
    Measurement,
    NumericalError,
    PiecewiseCurve,
    SensorArray,
    SolverConfig,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
    clamp_to_domain,
    constant_curve,
    make_uniform_grid,
    sample_cadlag,
)
from .forward import (
    IntervalMeasureSpec,
    forward_atom,
    forward_interval_measure,
    forward_measure,
    kernel_eval,
    kernel_interval_integral,
)
from .objective import (
    ResidualGradient,
    a0,
    certificate_value,
    discrete_variation,
    fidelity,
    fidelity_gradient,
    objective_value,
    regularizer_value,
)
from .insertion import (
    certificate_gradient,
    certificate_smoothed,
    gradient_ascent,
    multi_start_insertion,
    smoothed_abs,
)
from .coefficients import (
    AtomResponseMatrix,
    assemble_atom_responses,
    kkt_residual,
    solve_nonneg_l1,
)
from .solver import (
    IterationRecord,
    ReconstructionResult,
    STOP_CERTIFICATE,
    STOP_MAX_ITERS,
    fcgcg_solve,
    prune,
    residual_log,
)
from .experiments import (
    EXPERIMENT_DEFAULTS,
    ExperimentSpec,
    add_noise,
    default_setup,
    experiment_spec,
    ground_truth,
    run_experiment,
    simulate,
)
from .validation import (
    finite_diff_gradient,
    forward_blurred,
    sampled_w1_error,
    w1_1d,
    w1_lp_oracle,
)

__version__ = "0.1.0"
