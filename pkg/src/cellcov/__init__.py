"""Coverage probability of Poisson cellular networks.

Analytic (adaptive-quadrature) and Monte Carlo evaluation of downlink and
uplink SIR coverage under Rayleigh fading, including the density-carrying
integral forms whose agreement with the density-free ones demonstrates that
coverage probability does not depend on base-station density.
"""

from .analytic import (
    NonConvergenceError,
    coverage_curve,
    dl_coverage,
    dl_coverage_alpha4,
    dl_coverage_alpha6,
    dl_coverage_with_density,
    ul_coverage,
    ul_coverage_eps0,
    ul_coverage_eps0_alpha4,
    ul_coverage_eps1,
    ul_coverage_with_density,
)
from .params import (
    CoverageMethod,
    CoveragePoint,
    NetworkParams,
    SirThreshold,
    threshold_grid,
)
from .quadrature import (
    DEFAULT_SPEC,
    EvalBudget,
    IntegralResult,
    NonFiniteEvaluationError,
    PerformanceBudgetError,
    QuadratureSpec,
    SlowDecayError,
    integrate_finite,
    integrate_semi_infinite,
)
from .refcurves import load_reference_curves, reference_curve
from .sici import (
    beta_half_half,
    beta_reciprocal_pair,
    cosine_integral_ci,
    sine_integral_si,
)
from .simulate import (
    DensityInvarianceResult,
    EstimatorResult,
    RealizationOutcome,
    SweepResult,
    density_invariance_experiment,
    dl_realization,
    downlink_sir,
    run_sweep,
    ul_realization,
    uplink_sir,
)
from .spatial import (
    AssociationTable,
    AttemptBudgetError,
    BsField,
    EmptyFieldError,
    RngStream,
    SimWindow,
    WindowTooSmallError,
    build_association_table,
    nearest_bs,
    nearest_distance_distribution_check,
    sample_bs_field,
)

__version__ = "0.1.0"
