"""Quadrature statistics and two-mode entanglement of Kerr-squeezed coherent light."""

__version__ = "0.1.0"

from .cumulants import (
    CumulantSet,
    DegenerateMeanError,
    asymptotic_kappa3,
    cumulants,
    cumulants_at,
    loglog_slope,
    number_state_kappa4,
    skew_ratio,
)
from .entanglement import (
    AngleOptimum,
    BeamsplitterConfig,
    CriterionResult,
    DegenerateInputError,
    OutputCumulants,
    TwoModeVariances,
    duan_simon,
    optimize_angle,
    output_cumulants,
    output_variances,
    reid_epr,
)
from .moments import (
    FrameSpec,
    ModeParams,
    QuadratureMoments,
    fluctuations,
    kerr_moment,
    mean_field_angle,
    quadrature_moments,
    variance,
)
from .oracle import (
    FockVector,
    TruncationPolicy,
    coherent_fock,
    evolve_kerr,
    number_state,
    oracle_cumulants,
    oracle_moment,
    oracle_quadrature_moments,
    oracle_two_mode,
)
from .sweep import SweepSpec, oracle_check, reproduce_figure, run_sweep
