"""Core domain types and parameter schedules.

HiBSA (hybrid block successive approximation) alternates proximal
descent steps over K minimization blocks with one regularized ascent
step on the maximization block.  Which ascent step is taken, and which
(gamma, beta) schedules are admissible, depends on the concavity regime
of the coupling function.  Everything in this module is a pure function
of its arguments; schedule values depend only on the iteration counter,
so runs can be replayed and property-tested without hidden state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "RegimeKind",
    "Regime",
    "BlockPoint",
    "ScheduleParams",
    "IterateTrace",
    "gamma_schedule",
    "beta_schedule",
    "default_beta_floor",
    "check_strongly_concave_conditions",
]


class RegimeKind(Enum):
    """How the objective behaves in the maximization variable."""

    STRONGLY_CONCAVE = "strongly_concave"
    CONCAVE = "concave"
    LINEAR = "linear"


@dataclass(frozen=True)
class Regime:
    """Concavity regime tag, with the strong-concavity modulus when relevant.

    ``theta`` is required (and must be positive) only for the strongly
    concave regime.  Values of ``theta`` in (0, 1] are accepted with a
    warning: the convergence constants degrade but the updates remain
    well defined.
    """

    kind: RegimeKind
    theta: float | None = None

    def __post_init__(self):
        if self.kind is RegimeKind.STRONGLY_CONCAVE:
            if self.theta is None or not np.isfinite(self.theta) or self.theta <= 0:
                raise ValueError("strongly concave regime requires theta > 0")
            if self.theta <= 1.0:
                warnings.warn(
                    f"strong-concavity modulus theta={self.theta:g} <= 1; "
                    "accepted, but rate constants degrade",
                    stacklevel=2,
                )
        elif self.theta is not None:
            raise ValueError(f"theta is only meaningful for the strongly "
                             f"concave regime, got {self.kind}")


def _frozen_vector(a, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BlockPoint:
    """An iterate: K minimization blocks ``x_blocks`` plus one block ``y``.

    Arrays are copied on construction and marked read-only, so instances
    are immutable values and safe to share across threads.
    """

    x_blocks: tuple[np.ndarray, ...]
    y: np.ndarray

    def __post_init__(self):
        blocks = tuple(
            _frozen_vector(b, f"x_blocks[{i}]") for i, b in enumerate(self.x_blocks)
        )
        object.__setattr__(self, "x_blocks", blocks)
        object.__setattr__(self, "y", _frozen_vector(self.y, "y"))

    @property
    def n_blocks(self) -> int:
        return len(self.x_blocks)

    def x_stacked(self) -> np.ndarray:
        """All minimization blocks concatenated into one vector."""
        if not self.x_blocks:
            return np.empty(0)
        return np.concatenate(self.x_blocks)

    def replace(self, x_blocks=None, y=None) -> "BlockPoint":
        return BlockPoint(
            x_blocks=self.x_blocks if x_blocks is None else tuple(x_blocks),
            y=self.y if y is None else y,
        )


@dataclass(frozen=True)
class ScheduleParams:
    """Constants feeding the beta schedule and the step-size conditions.

    ``mu`` holds the per-block strong-convexity moduli of the surrogate
    functions; ``mu_min`` (the quantity the beta schedule subtracts) is
    derived from it.
    """

    rho: float
    kappa: float
    L_y: float
    L_x: tuple[float, ...]
    L_u: tuple[float, ...]
    mu: tuple[float, ...]

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not (np.isfinite(self.kappa) and self.kappa > 2):
            raise ValueError(f"kappa must exceed 2, got {self.kappa}")
        if self.L_y < 0 or not np.isfinite(self.L_y):
            raise ValueError(f"L_y must be nonnegative, got {self.L_y}")
        object.__setattr__(self, "L_x", tuple(float(v) for v in self.L_x))
        object.__setattr__(self, "L_u", tuple(float(v) for v in self.L_u))
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        for name in ("L_x", "L_u", "mu"):
            vals = getattr(self, name)
            if any(v < 0 or not np.isfinite(v) for v in vals):
                raise ValueError(f"{name} entries must be nonnegative, got {vals}")
        if not (len(self.L_x) == len(self.L_u) == len(self.mu)):
            raise ValueError("L_x, L_u and mu must have one entry per block")

    @property
    def n_blocks(self) -> int:
        return len(self.L_x)

    @property
    def mu_min(self) -> float:
        return min(self.mu) if self.mu else 0.0


@dataclass(frozen=True)
class IterateTrace:
    """Per-iteration record emitted by a solver run.

    ``gap_norm`` is evaluated with the iteration's (beta, rho);
    ``gap_norm_fixed`` re-evaluates it at (beta, rho) = (1, 1) so traces
    from runs with different schedules stay comparable.
    """

    iter: int
    objective: float
    gap_norm: float
    gap_norm_fixed: float
    potential: float
    step_x_norm: float
    step_y_norm: float
    gamma: float
    beta: float

    def __post_init__(self):
        if self.iter < 0:
            raise ValueError("iteration index must be nonnegative")
        for name in ("gap_norm", "gap_norm_fixed", "step_x_norm", "step_y_norm"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be nonnegative and finite, got {v}")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


def gamma_schedule(r: int, rho: float) -> float:
    """Diminishing regularization coefficient, 1 / (rho * r**(1/4)).

    The sequence is positive, strictly decreasing, tends to zero, and has
    divergent sum of squares, while the reciprocal increments
    1/gamma(r+1) - 1/gamma(r) stay below 0.19 * rho for every r >= 1.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"iteration counter must be a positive integer, got {r}")
    if not (np.isfinite(rho) and rho > 0):
        raise ValueError(f"rho must be positive, got {rho}")
    return 1.0 / (rho * float(r) ** 0.25)


def default_beta_floor(params: ScheduleParams) -> float:
    """Floor keeping every beta value above max_i L_x[i].

    The raw beta formula can dip below the per-block gradient Lipschitz
    constants when L_y is small; this floor restores the requirement.
    The mu correction compensates the -2*mu_min term in the raw formula.
    """
    top = max(params.L_x, default=0.0)
    if top == 0.0:
        return 0.0
    return 1.01 * top + 2.0 * params.mu_min


def beta_schedule(r: int, params: ScheduleParams, beta_min: float | None = None) -> float:
    """Increasing proximal weight for the x-updates in the diminishing-gamma regimes.

    Returns ``rho*L_y**2 + 2*kappa*L_y**2 / (rho*gamma_r**2) - 2*mu_min``
    floored at ``beta_min`` (default :func:`default_beta_floor`).  The
    sequence is nondecreasing in ``r`` and exceeds every ``L_x[i]``.

    Raises
    ------
    ValueError
        If the floor cannot dominate ``max_i L_x[i]``, or the resulting
        value is not positive.
    """
    gamma_r = gamma_schedule(r, params.rho)
    if beta_min is None:
        beta_min = default_beta_floor(params)
    top = max(params.L_x, default=0.0)
    if top > 0.0 and beta_min <= top:
        raise ValueError(
            f"beta floor {beta_min} cannot satisfy beta > max L_x = {top}; "
            "raise beta_min"
        )
    raw = (
        params.rho * params.L_y**2
        + 2.0 * params.kappa * params.L_y**2 / (params.rho * gamma_r**2)
        - 2.0 * params.mu_min
    )
    value = max(raw, beta_min)
    if value <= 0.0:
        raise ValueError(
            "beta schedule produced a nonpositive value; provide a positive beta_min"
        )
    return value


def check_strongly_concave_conditions(
    params: ScheduleParams, theta: float, beta: float
) -> bool:
    """Step-size admissibility for the strongly concave regime.

    True iff rho < theta / (4 * L_y**2) (vacuously when L_y == 0) and,
    for every block i,
    ``beta > L_y**2 * (2/(theta**2 * rho) + rho/2) + L_x[i]/2 - mu[i]``.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if params.L_y > 0 and not params.rho < theta / (4.0 * params.L_y**2):
        return False
    base = params.L_y**2 * (2.0 / (theta**2 * params.rho) + params.rho / 2.0)
    return all(
        beta > base + lx / 2.0 - m for lx, m in zip(params.L_x, params.mu)
    )
