"""Stationarity gap, potential monitors, gradient checks, rate fits.

The stationarity gap stacks the scaled prox fixed-point residuals of
every block; its norm vanishes exactly at first-order stationary points,
and in the unconstrained smooth case it reduces to the plain gradient,
independent of the (beta, rho) parameters.

The two potential functions combine objective value and squared iterate
differences; along admissible runs they decrease monotonically, which is
what the convergence rates rest on, so they are tracked per iteration as
a health monitor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BlockPoint
from .prox import ConvexSet, prox_x, prox_y

__all__ = [
    "GapVector",
    "RateFit",
    "stationarity_gap",
    "potential_strongly_concave",
    "potential_concave",
    "finite_difference_check",
    "fit_rate",
    "maxmin_kkt_residual",
    "y_set_radius",
]


@dataclass(frozen=True, eq=False)
class GapVector:
    """The (K+1)-block stationarity residual at parameters (beta, rho)."""

    x_parts: tuple[np.ndarray, ...]
    y_part: np.ndarray
    beta: float
    rho: float

    def x_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(p**2) for p in self.x_parts)))

    def norm(self) -> float:
        return float(np.sqrt(self.x_norm() ** 2 + np.sum(self.y_part**2)))


def stationarity_gap(problem, point: BlockPoint, beta: float, rho: float) -> GapVector:
    """Scaled prox fixed-point residuals of every block at the point.

    Block i holds beta * (x_i - Px(x_i - grad_i / beta)); the last block
    (y - Py(y + rho * grad_y)) / rho.  Zero norm characterizes first-order
    stationarity.
    """
    if not (beta > 0 and rho > 0):
        raise ValueError("beta and rho must be positive")
    x_blocks = list(point.x_blocks)
    y = point.y
    x_parts = []
    for i in range(problem.K):
        g = problem.grad_x(i, x_blocks, y)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"grad_x[{i}] is non-finite")
        moved = prox_x(problem.h[i], problem.x_sets[i], beta, x_blocks[i] - g / beta)
        x_parts.append(beta * (x_blocks[i] - moved))
    gy = problem.grad_y(x_blocks, y)
    if not np.all(np.isfinite(gy)):
        raise FloatingPointError("grad_y is non-finite")
    moved_y = prox_y(problem.g, problem.y_set, rho, y + rho * gy)
    return GapVector(
        x_parts=tuple(x_parts), y_part=(y - moved_y) / rho, beta=beta, rho=rho
    )


def potential_strongly_concave(
    problem, point_r1: BlockPoint, point_r: BlockPoint,
    rho: float, theta: float, L_y: float,
) -> float:
    """Objective plus the weighted squared y-step:

    P = l(x+, y+) + (2/(rho^2 theta) + 1/(2 rho) - 4 (1/rho - L_y^2/(2 theta^2)))
        * ||y+ - y||^2.

    The coefficient can be negative for some admissible constants; the
    descent inequality, not the sign, is the monitored property.
    """
    coeff = (
        2.0 / (rho**2 * theta)
        + 1.0 / (2.0 * rho)
        - 4.0 * (1.0 / rho - L_y**2 / (2.0 * theta**2))
    )
    dy = float(np.sum((point_r1.y - point_r.y) ** 2))
    return problem.objective(list(point_r1.x_blocks), point_r1.y) + coeff * dy


def potential_concave(
    problem, point_r1: BlockPoint, point_r: BlockPoint,
    rho: float, gamma_next: float, gamma_r: float, gamma_prev: float,
) -> float:
    """Potential for the diminishing-gamma regimes.

    P = (1/(2 rho) + 2/(rho^2 gamma_r) + (2/rho)(1/(rho gamma_next) - 1/(rho gamma_r)))
        * ||y+ - y||^2 + l(x+, y+) - (gamma_r/2) ||y+||^2
        - (2/rho)(gamma_prev/gamma_r - 1) ||y+||^2.
    """
    if min(gamma_next, gamma_r, gamma_prev) <= 0:
        raise ValueError("schedule values must be positive")
    dy = float(np.sum((point_r1.y - point_r.y) ** 2))
    ysq = float(np.sum(point_r1.y**2))
    coeff = (
        1.0 / (2.0 * rho)
        + 2.0 / (rho**2 * gamma_r)
        + (2.0 / rho) * (1.0 / (rho * gamma_next) - 1.0 / (rho * gamma_r))
    )
    return (
        coeff * dy
        + problem.objective(list(point_r1.x_blocks), point_r1.y)
        - 0.5 * gamma_r * ysq
        - (2.0 / rho) * (gamma_prev / gamma_r - 1.0) * ysq
    )


def finite_difference_check(problem, point: BlockPoint, h_step: float = 1e-6) -> dict:
    """Central-difference verification of every analytic gradient.

    Returns per-block relative errors keyed "x0", "x1", ..., "y"; each is
    ||analytic - numeric|| / max(1, ||analytic||, ||numeric||).  Values
    below 1e-5 count as passing.
    """
    if not 1e-7 <= h_step <= 1e-4:
        raise ValueError("h_step must lie in [1e-7, 1e-4]")
    x_blocks = [b.copy() for b in point.x_blocks]
    y = point.y.copy()
    errors = {}

    def rel_err(analytic, numeric):
        denom = max(1.0, np.linalg.norm(analytic), np.linalg.norm(numeric))
        return float(np.linalg.norm(analytic - numeric) / denom)

    for i in range(problem.K):
        fd = np.zeros_like(x_blocks[i])
        for j in range(x_blocks[i].size):
            orig = x_blocks[i][j]
            x_blocks[i][j] = orig + h_step
            hi = problem.f(x_blocks, y)
            x_blocks[i][j] = orig - h_step
            lo = problem.f(x_blocks, y)
            x_blocks[i][j] = orig
            fd[j] = (hi - lo) / (2.0 * h_step)
        errors[f"x{i}"] = rel_err(problem.grad_x(i, x_blocks, y), fd)

    fd = np.zeros_like(y)
    for j in range(y.size):
        orig = y[j]
        y[j] = orig + h_step
        hi = problem.f(x_blocks, y)
        y[j] = orig - h_step
        lo = problem.f(x_blocks, y)
        y[j] = orig
        fd[j] = (hi - lo) / (2.0 * h_step)
    errors["y"] = rel_err(problem.grad_y(x_blocks, y), fd)
    return errors


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through log(running min gap^2) vs log(iteration)."""

    slope: float
    intercept: float
    r_squared: float
    already_converged: bool = False

    def __post_init__(self):
        if not -1e-12 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError(f"r_squared out of range: {self.r_squared}")


def fit_rate(trace, burn_in: int | None = None) -> RateFit:
    """Fit the decay exponent of the best-so-far squared gap.

    The running minimum is taken over iterations past ``burn_in``
    (default: the first 10%), so a transient spike or a lucky early
    iterate does not pin the whole curve.  A trace whose gaps are all
    zero past burn-in returns slope 0 flagged ``already_converged``.
    """
    gaps = np.array([t.gap_norm for t in trace], dtype=float)
    n = gaps.size
    if burn_in is None:
        burn_in = n // 10
    if n <= burn_in + 10:
        raise ValueError(f"trace too short: {n} rows, burn-in {burn_in}")
    tail = gaps[burn_in:] ** 2
    running = np.minimum.accumulate(tail)
    T = np.arange(burn_in + 1, n + 1, dtype=float)
    if np.all(running == 0.0):
        return RateFit(0.0, 0.0, 1.0, already_converged=True)
    positive = running > 0.0
    if positive.sum() < 2:
        return RateFit(0.0, 0.0, 1.0, already_converged=True)
    logT = np.log(T[positive])
    logm = np.log(running[positive])
    slope, intercept = np.polyfit(logT, logm, 1)
    fitted = slope * logT + intercept
    ss_res = float(np.sum((logm - fitted) ** 2))
    ss_tot = float(np.sum((logm - logm.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(float(slope), float(intercept), min(r2, 1.0))


def maxmin_kkt_residual(
    rates: np.ndarray,
    y_star: np.ndarray,
    x_blocks,
    grad_blocks,
    x_sets,
) -> float:
    """Residual of the max-min fairness optimality system at (x*, y*).

    With lambda* = min_k rates[k], the returned value is the max of

    * complementary slackness  max_k |y*_k (lambda* - rates[k])|,
    * the rate floor violation max_k (lambda* - rates[k])_+  (zero by
      construction of lambda*),
    * the fixed-point residual  ||x* - P(x* + grad_weighted)|| of the
      weighted-rate ascent direction on the power sets, where
      ``grad_blocks`` holds sum_k y*_k grad R_k(x*) per block.
    """
    rates = np.asarray(rates, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if abs(y_star.sum() - 1.0) > 1e-8 or np.any(y_star < -1e-8):
        raise ValueError("y_star must lie on the probability simplex")
    lam_star = float(rates.min())
    slackness = float(np.max(np.abs(y_star * (lam_star - rates))))
    floor_violation = float(np.max(np.maximum(lam_star - rates, 0.0)))
    vi = 0.0
    for b, g, s in zip(x_blocks, grad_blocks, x_sets):
        b = np.asarray(b, dtype=float)
        moved = s.project(b + np.asarray(g, dtype=float))
        vi += float(np.sum((b - moved) ** 2))
    return max(slackness, floor_violation, float(np.sqrt(vi)))


def y_set_radius(y_set: ConvexSet) -> float:
    """Upper bound on ||y|| over the declared compact y set."""
    from .prox import Ball, Box, BudgetSimplex, FullSpace, Simplex

    if isinstance(y_set, Simplex):
        return y_set.scale
    if isinstance(y_set, BudgetSimplex):
        return y_set.budget
    if isinstance(y_set, Box):
        corner = np.maximum(np.abs(y_set.lower), np.abs(y_set.upper))
        return float(np.linalg.norm(corner))
    if isinstance(y_set, Ball):
        return float(np.linalg.norm(y_set.center_point) + y_set.radius)
    if isinstance(y_set, FullSpace):
        raise ValueError("full space has no finite radius")
    raise ValueError(f"unknown set {type(y_set).__name__}")
