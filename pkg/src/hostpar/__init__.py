"""Analysis toolkit for a two-timescale host-parasite extinction model.

The package covers the model's closed-form objects (equilibria, nullclines,
the fast-flow invariant and its separatrices), an adaptive integrator with a
log-infected chart for near-extinction stiffness, a five-regime asymptotic
classifier with falsifying experiments, and the desingularization charts
that resolve the dynamics at the extinction state.
"""
from . import blowup, selfcheck
from .equilibria import (
    BifurcationBranch,
    EquilibriumReport,
    ReproductionNumbers,
    bifurcation_sweep,
    classify_equilibrium,
    dfe,
    ee_exact,
    ee_expansion,
    jacobian,
    reproduction_numbers,
)
from .fields import (
    SingularOriginError,
    aux_field,
    dulac_divergence,
    fast_field,
    full_field,
    in_delta,
    log_field,
    reduced_slow_flow,
    slow_component,
    slow_field,
)
from .geometry import (
    RegimeError,
    Side,
    exit_curve,
    gamma_invariant,
    predict_side,
    score_side_predictions,
    separatrix_gamma,
    triangle_grid,
    u_infinity,
)
from .integrate import (
    Event,
    EventHit,
    EventNotFoundError,
    IntegrationError,
    IntegrationOptions,
    Trajectory,
    detect_event,
    integrate,
    integrate_generic,
)
from .nullclines import (
    BranchCurve,
    NullclineSlopes,
    nullcline_slopes,
    theta0_parabola,
    u_nullcline_branch,
    v_nullcline,
)
from .params import CASE_SETS, EPS_MAX, PRESETS, Params, PhysicalParams, normalize, preset
from .regimes import (
    CanardMetrics,
    RegimeCase,
    canard_metrics,
    classify_regime,
    heteroclinic_cycle_distance,
    homoclinic_experiment,
    standard_ic_grid,
    verify_asymptotics,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
