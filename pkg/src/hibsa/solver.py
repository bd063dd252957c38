"""HiBSA main loop, block updates, and the plain descent-ascent baseline.

One iteration sweeps the minimization blocks in order, each solving a
strongly convex surrogate subproblem in closed prox form, then takes a
single regularized ascent step on the maximization block.  The ascent
step depends on the concavity regime:

* strongly concave -- proximal gradient ascent with weight 1/rho and no
  extra penalty;
* linear coupling  -- the same linearized step plus a diminishing
  -(gamma_r/2) * ||y||^2 penalty, still in closed form;
* merely concave   -- the regularized inner maximization is solved to a
  tolerance by projected proximal gradient ascent (the inner problem is
  (1/rho + gamma_r)-strongly concave, so this converges linearly).

``gda_run`` implements the no-regularization alternating gradient
descent-ascent recursion on a bilinear objective, the classic example of
a scheme that never reaches a stationary point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    BlockPoint,
    IterateTrace,
    RegimeKind,
    ScheduleParams,
    beta_schedule,
    check_strongly_concave_conditions,
    gamma_schedule,
)
from .diagnostics import potential_concave, potential_strongly_concave, stationarity_gap
from .problems import MinMaxProblem
from .prox import prox_x, prox_y

__all__ = [
    "Surrogate",
    "SolverConfig",
    "SolverState",
    "SolveResult",
    "InnerSolverError",
    "default_start",
    "x_block_update",
    "y_update_strongly_concave",
    "y_update_linear",
    "y_update_concave",
    "strongly_concave_defaults",
    "hibsa_run",
    "gda_iterates",
    "gda_run",
]


class InnerSolverError(RuntimeError):
    """Inner maximizer hit its iteration cap; carries the last iterate."""

    def __init__(self, iterate: np.ndarray, residual: float):
        super().__init__(
            f"inner maximization stalled at residual {residual:.3e}"
        )
        self.iterate = iterate
        self.residual = residual


@dataclass(frozen=True)
class Surrogate:
    """Per-block convex model of the coupling function.

    ``quadratic_upper_bound`` linearizes f around the current block and
    adds (L_x[i]/2) * ||v - x_i||^2, a tight upper bound with modulus
    mu_i = L_x[i].  ``proximal_linear`` uses caller-chosen moduli
    instead, which need not upper-bound f.
    """

    kind: str = "quadratic_upper_bound"
    moduli: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("quadratic_upper_bound", "proximal_linear"):
            raise ValueError(f"unknown surrogate kind {self.kind!r}")
        if self.kind == "proximal_linear" and self.moduli is None:
            raise ValueError("proximal_linear requires explicit moduli")
        if self.moduli is not None:
            object.__setattr__(self, "moduli", tuple(float(m) for m in self.moduli))

    def block_moduli(self, problem: MinMaxProblem) -> tuple[float, ...]:
        if self.moduli is not None:
            if len(self.moduli) != problem.K:
                raise ValueError("surrogate moduli must have one entry per block")
            return self.moduli
        return problem.L_x


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.  ``preset`` selects the schedule family:

    * ``"default"`` -- regime-appropriate schedules: constant beta and
      gamma = 0 when strongly concave, gamma = 1/(rho * r**(1/4)) with
      the matching increasing beta otherwise;
    * ``"fig1"``    -- gamma = 1/sqrt(r), beta = r, the aggressive pair
      used by the bilinear benchmark.
    """

    rho: float = 1.0
    kappa: float = 3.0
    preset: str = "default"
    beta_const: float | None = None  # strongly concave regime; None derives it
    beta_min: float | None = None    # floor for the increasing beta schedule
    epsilon: float = 1e-6
    max_iter: int = 1000
    inner_tol: float = 1e-8
    inner_max_iter: int = 10_000
    enforce_conditions: bool = False
    freeze_y: bool = False
    seed: int = 0
    gap_beta_fixed: float = 1.0
    gap_rho_fixed: float = 1.0
    surrogate: Surrogate = Surrogate()

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.kappa > 2:
            raise ValueError("kappa must exceed 2")
        if self.preset not in ("default", "fig1"):
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass
class SolverState:
    """Mutable loop state; ``trace`` grows by one entry per iteration."""

    current: BlockPoint
    previous: BlockPoint
    iter: int
    trace: list[IterateTrace]
    rng_seed: int


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a run.  ``converged`` is False when the iteration budget
    ran out first; ``best_point`` then carries the lowest-gap iterate."""

    point: BlockPoint
    trace: tuple[IterateTrace, ...]
    converged: bool
    iterations: int
    best_point: BlockPoint
    best_gap: float


def default_start(problem: MinMaxProblem) -> BlockPoint:
    """Deterministic feasible start: zero projected onto each block set,
    the center of the y set."""
    return BlockPoint(
        x_blocks=tuple(s.project(np.zeros(d)) for s, d in zip(problem.x_sets, problem.block_dims)),
        y=problem.y_set.center(),
    )


def _finite(vec: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(vec)):
        raise FloatingPointError(f"{what} evaluated to non-finite values")
    return vec


def x_block_update(
    problem: MinMaxProblem,
    i: int,
    x_blocks: list[np.ndarray],
    y: np.ndarray,
    beta_r: float,
    modulus_i: float,
) -> np.ndarray:
    """Solve the block-i surrogate subproblem at proximal weight beta_r.

    With a linearized surrogate of modulus m the subproblem collapses to
    a single prox step of weight m + beta_r at the gradient point.
    """
    if not beta_r > 0:
        raise ValueError("beta_r must be positive")
    g = _finite(problem.grad_x(i, x_blocks, y), f"grad_x[{i}]")
    weight = modulus_i + beta_r
    v = x_blocks[i] - g / weight
    return prox_x(problem.h[i], problem.x_sets[i], weight, v)


def y_update_strongly_concave(
    problem: MinMaxProblem, x_new: list[np.ndarray], y_old: np.ndarray, rho: float
) -> np.ndarray:
    """Single proximal ascent step, no penalty term."""
    g = _finite(problem.grad_y(x_new, y_old), "grad_y")
    return prox_y(problem.g, problem.y_set, rho, y_old + rho * g)


def y_update_linear(
    problem: MinMaxProblem,
    x_new: list[np.ndarray],
    y_old: np.ndarray,
    rho: float,
    gamma_r: float,
) -> np.ndarray:
    """Linearized ascent step with the -(gamma_r/2)*||y||^2 penalty folded in.

    The penalty re-centers the quadratic: the step equals a prox at the
    effective weight 1/rho + gamma_r anchored at (y/rho + grad)/(1/rho + gamma_r).
    With gamma_r = 0 this is exactly the strongly concave step.
    """
    g = _finite(problem.grad_y(x_new, y_old), "grad_y")
    inv_eff = 1.0 / rho + gamma_r
    w = (y_old / rho + g) / inv_eff
    return prox_y(problem.g, problem.y_set, 1.0 / inv_eff, w)


def y_update_concave(
    problem: MinMaxProblem,
    x_new: list[np.ndarray],
    y_old: np.ndarray,
    rho: float,
    gamma_r: float,
    inner_tol: float = 1e-8,
    inner_max_iter: int = 10_000,
) -> np.ndarray:
    """Maximize f(x_new, u) - g(u) - ||u - y_old||^2/(2 rho) - gamma_r ||u||^2/2.

    Projected proximal gradient ascent with the fixed step
    1/(L_y + 1/rho + gamma_r); the objective is (1/rho + gamma_r)-strongly
    concave so the residual contracts linearly.  Raises
    :class:`InnerSolverError` if the cap is reached first.
    """
    step = 1.0 / (problem.L_y + 1.0 / rho + gamma_r)
    u = y_old.copy()
    residual = np.inf
    for _ in range(inner_max_iter):
        g = _finite(problem.grad_y(x_new, u), "grad_y")
        g_smooth = g - (u - y_old) / rho - gamma_r * u
        u_next = prox_y(problem.g, problem.y_set, step, u + step * g_smooth)
        residual = float(np.linalg.norm(u_next - u) / step)
        u = u_next
        if residual <= inner_tol:
            return u
    raise InnerSolverError(u, residual)


def strongly_concave_defaults(
    problem: MinMaxProblem, config: SolverConfig, margin: float = 1.05
) -> SolverConfig:
    """Replace rho/beta with values satisfying the strongly concave
    step-size conditions for this problem's declared constants."""
    theta = problem.regime.theta
    if theta is None:
        raise ValueError("problem is not strongly concave")
    rho = config.rho
    if problem.L_y > 0:
        rho = min(rho, 0.5 * theta / (4.0 * problem.L_y**2))
    moduli = config.surrogate.block_moduli(problem)
    base = problem.L_y**2 * (2.0 / (theta**2 * rho) + rho / 2.0)
    thresh = max(
        base + lx / 2.0 - m for lx, m in zip(problem.L_x, moduli)
    )
    beta = margin * max(thresh, max(problem.L_x, default=0.0), 1e-6)
    return replace(config, rho=rho, beta_const=beta)


def _schedule(regime_kind: RegimeKind, r: int, config: SolverConfig,
              params: ScheduleParams, derived_beta: float) -> tuple[float, float]:
    if config.preset == "fig1":
        return 1.0 / np.sqrt(r), float(r)
    if regime_kind is RegimeKind.STRONGLY_CONCAVE:
        return 0.0, derived_beta
    return gamma_schedule(r, config.rho), beta_schedule(r, params, config.beta_min)


def hibsa_run(
    problem: MinMaxProblem, config: SolverConfig, x0: BlockPoint | None = None
) -> SolveResult:
    """Run HiBSA from x0 (default :func:`default_start`) until the
    stationarity gap drops to ``config.epsilon`` or the budget runs out.

    Deterministic: identical (problem, config, x0) reproduce the trace
    bit for bit.  When ``freeze_y`` is set the maximization block is held
    at its start value and the stopping gap uses the x residuals only.
    """
    point = default_start(problem) if x0 is None else x0
    problem.validate_point(point)

    moduli = config.surrogate.block_moduli(problem)
    params = ScheduleParams(
        rho=config.rho,
        kappa=config.kappa,
        L_y=problem.L_y,
        L_x=problem.L_x,
        L_u=moduli,
        mu=moduli,
    )

    regime = problem.regime.kind
    derived_beta = config.beta_const if config.beta_const is not None else 0.0
    if regime is RegimeKind.STRONGLY_CONCAVE and config.preset == "default":
        if config.beta_const is None:
            derived_beta = strongly_concave_defaults(problem, config).beta_const
        if not check_strongly_concave_conditions(params, problem.regime.theta, derived_beta):
            msg = (
                f"(rho={config.rho:g}, beta={derived_beta:g}) violate the "
                "strongly concave step-size conditions"
            )
            if config.enforce_conditions:
                raise ValueError(msg)
            warnings.warn(msg, stacklevel=2)

    state = SolverState(
        current=point, previous=point, iter=0, trace=[], rng_seed=config.seed
    )
    best_point, best_gap = point, np.inf
    converged = False

    for r in range(1, config.max_iter + 1):
        gamma_r, beta_r = _schedule(regime, r, config, params, derived_beta)
        x_old = [b for b in state.current.x_blocks]
        y_old = state.current.y

        x_new = list(x_old)
        for i in range(problem.K):
            x_new[i] = x_block_update(problem, i, x_new, y_old, beta_r, moduli[i])

        if config.freeze_y:
            y_new = y_old.copy()
        elif config.preset == "fig1" or regime is RegimeKind.LINEAR:
            y_new = y_update_linear(problem, x_new, y_old, config.rho, gamma_r)
        elif regime is RegimeKind.STRONGLY_CONCAVE:
            y_new = y_update_strongly_concave(problem, x_new, y_old, config.rho)
        else:
            y_new = y_update_concave(
                problem, x_new, y_old, config.rho, gamma_r,
                config.inner_tol, config.inner_max_iter,
            )

        new_point = BlockPoint(x_blocks=tuple(x_new), y=y_new)
        gap = stationarity_gap(problem, new_point, beta_r, config.rho)
        gap_norm = gap.x_norm() if config.freeze_y else gap.norm()
        gap_fixed = stationarity_gap(
            problem, new_point, config.gap_beta_fixed, config.gap_rho_fixed
        )
        gap_fixed_norm = gap_fixed.x_norm() if config.freeze_y else gap_fixed.norm()

        if regime is RegimeKind.STRONGLY_CONCAVE:
            potential = potential_strongly_concave(
                problem, new_point, state.current, config.rho,
                problem.regime.theta, problem.L_y,
            )
        else:
            g_next = _schedule(regime, r + 1, config, params, derived_beta)[0]
            g_prev = (
                _schedule(regime, r - 1, config, params, derived_beta)[0]
                if r > 1 else gamma_r
            )
            potential = potential_concave(
                problem, new_point, state.current, config.rho,
                g_next, gamma_r, g_prev,
            )

        step_x = float(
            np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(x_new, x_old)))
        )
        step_y = float(np.linalg.norm(y_new - y_old))
        state.trace.append(
            IterateTrace(
                iter=r,
                objective=problem.objective(x_new, y_new),
                gap_norm=gap_norm,
                gap_norm_fixed=gap_fixed_norm,
                potential=potential,
                step_x_norm=step_x,
                step_y_norm=step_y,
                gamma=gamma_r,
                beta=beta_r,
            )
        )
        state.previous = state.current
        state.current = new_point
        state.iter = r

        if gap_norm < best_gap:
            best_point, best_gap = new_point, gap_norm
        if gap_norm <= config.epsilon:
            converged = True
            break

    return SolveResult(
        point=state.current,
        trace=tuple(state.trace),
        converged=converged,
        iterations=state.iter,
        best_point=best_point,
        best_gap=best_gap,
    )


def gda_iterates(A, eta: float, lam: float, iters: int, x0, y0):
    """Yield (r, x, y, gap) for the alternating descent-ascent recursion

        x_r = x_{r-1} - (1/eta) A' y_{r-1},   y_r = y_{r-1} + 2 lam A x_r

    with gap ||A x||^2 + ||A' y||^2.  Divergence is expected behavior:
    once the iterates overflow, the remaining gaps are reported as +inf
    rather than propagating NaNs from inf - inf cancellations.
    """
    A = np.asarray(A, dtype=float)
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    if not eta > 0 or not lam > 0:
        raise ValueError("eta and lam must be positive")
    overflowed = False
    with np.errstate(over="ignore", invalid="ignore"):
        for r in range(1, iters + 1):
            if not overflowed:
                x = x - (A.T @ y) / eta
                y = y + 2.0 * lam * (A @ x)
                if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                    overflowed = True
            if overflowed:
                yield r, x, y, np.inf
            else:
                gap = float(np.sum((A @ x) ** 2) + np.sum((A.T @ y) ** 2))
                yield r, x, y, gap if np.isfinite(gap) else np.inf


def gda_run(A, eta: float, lam: float, iters: int, x0, y0) -> np.ndarray:
    """Per-iteration gap trace of the plain descent-ascent recursion."""
    return np.array([gap for _, _, _, gap in gda_iterates(A, eta, lam, iters, x0, y0)])
