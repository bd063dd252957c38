"""Solver and benchmarks for block-wise one-sided non-convex min-max problems."""

from .core import (
    BlockPoint,
    IterateTrace,
    Regime,
    RegimeKind,
    ScheduleParams,
    beta_schedule,
    check_strongly_concave_conditions,
    gamma_schedule,
)
from .diagnostics import (
    GapVector,
    RateFit,
    finite_difference_check,
    fit_rate,
    maxmin_kkt_residual,
    potential_concave,
    potential_strongly_concave,
    stationarity_gap,
)
from .problems import (
    ChannelModel,
    MinMaxProblem,
    bilinear_problem,
    designed_channel,
    jamming_problem,
    lse_baseline,
    maxmin_rate_problem,
    rayleigh_channel,
    robust_learning_problem,
    solve_smooth_max,
    sum_rate,
    two_domain_synthetic,
    user_rates,
)
from .prox import (
    Ball,
    Box,
    BudgetSimplex,
    FullSpace,
    L1Norm,
    Simplex,
    SquaredL2,
    ZeroFn,
    ZERO,
    project,
    prox_x,
    prox_y,
)
from .solver import (
    InnerSolverError,
    SolveResult,
    SolverConfig,
    Surrogate,
    default_start,
    gda_run,
    hibsa_run,
    strongly_concave_defaults,
    x_block_update,
    y_update_concave,
    y_update_linear,
    y_update_strongly_concave,
)

__version__ = "0.1.0"
