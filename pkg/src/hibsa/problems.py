"""Benchmark problem instances.

Four one-sided non-convex min-max problems, each packaged behind the
``MinMaxProblem`` contract with analytic gradients:

* ``bilinear_problem``    -- min_x max_y  y'Ax, the divergence showcase.
* ``jamming_problem``     -- users allocate power across channels to
  maximize sum rate while a jammer allocates noise power to minimize it;
  strongly concave in the jammer variable.
* ``maxmin_rate_problem`` -- max-min fair power control rewritten as a
  min-max problem linear in the simplex weights y.
* ``robust_learning_problem`` -- worst-case-weighted logistic regression
  over several data domains with a quadratic distance to a prior.

A smooth log-sum-exp surrogate of the min-rate objective
(``lse_baseline``) is included as a minimization-only comparison.

Lipschitz constants and the jamming strong-concavity modulus are not
available in closed form for the channel problems, so they are estimated
by seeded sampling over the operating region (interior-weighted feasible
points) with a safety factor, and cached on the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import BlockPoint, Regime, RegimeKind
from .prox import (
    ZERO,
    BudgetSimplex,
    ConvexSet,
    FullSpace,
    ProxFunction,
    Simplex,
    Ball,
    sample_interior,
)

__all__ = [
    "MinMaxProblem",
    "ChannelModel",
    "rayleigh_channel",
    "designed_channel",
    "bilinear_problem",
    "jamming_problem",
    "maxmin_rate_problem",
    "user_rates",
    "sum_rate",
    "lse_baseline",
    "SmoothMaxProblem",
    "solve_smooth_max",
    "robust_learning_problem",
    "two_domain_synthetic",
    "logistic_loss",
]

_ESTIMATION_SEED = 9127  # fixed stream so constants are deterministic per model


@dataclass(frozen=True, eq=False)
class MinMaxProblem:
    """Contract every benchmark implements.

    ``f`` couples the blocks; ``grad_x(i, x_blocks, y)`` and
    ``grad_y(x_blocks, y)`` are its analytic block gradients.  ``h`` and
    ``g`` are registered prox-friendly regularizers, and the L constants
    are valid over the sets' operating region.  Instances are immutable
    and evaluation is pure, so they are safe to share between runs.
    """

    name: str
    block_dims: tuple[int, ...]
    y_dim: int
    regime: Regime
    f: Callable[[Sequence[np.ndarray], np.ndarray], float]
    grad_x: Callable[[int, Sequence[np.ndarray], np.ndarray], np.ndarray]
    grad_y: Callable[[Sequence[np.ndarray], np.ndarray], np.ndarray]
    x_sets: tuple[ConvexSet, ...]
    y_set: ConvexSet
    L_x: tuple[float, ...]
    L_y: float
    h: tuple[ProxFunction, ...] = ()
    g: ProxFunction = ZERO

    def __post_init__(self):
        if not self.h:
            object.__setattr__(self, "h", tuple(ZERO for _ in self.block_dims))
        if len(self.h) != self.K or len(self.x_sets) != self.K or len(self.L_x) != self.K:
            raise ValueError("h, x_sets and L_x must have one entry per block")

    @property
    def K(self) -> int:
        return len(self.block_dims)

    def objective(self, x_blocks: Sequence[np.ndarray], y: np.ndarray) -> float:
        """Full objective f + sum_i h_i(x_i) - g(y)."""
        val = self.f(x_blocks, y)
        val += sum(h.value(b) for h, b in zip(self.h, x_blocks))
        val -= self.g.value(y)
        return float(val)

    def validate_point(self, point: BlockPoint, tol: float = 1e-9):
        if point.n_blocks != self.K:
            raise ValueError(f"expected {self.K} blocks, got {point.n_blocks}")
        for i, (b, dim, cset) in enumerate(
            zip(point.x_blocks, self.block_dims, self.x_sets)
        ):
            if b.size != dim:
                raise ValueError(f"block {i} has dimension {b.size}, expected {dim}")
            if not cset.contains(b, tol):
                raise ValueError(f"block {i} is infeasible")
        if point.y.size != self.y_dim:
            raise ValueError(f"y has dimension {point.y.size}, expected {self.y_dim}")
        if not self.y_set.contains(point.y, tol):
            raise ValueError("y is infeasible")

    def sample_point(self, rng: np.random.Generator) -> BlockPoint:
        """Random interior-feasible point (for checks and estimation)."""
        return BlockPoint(
            x_blocks=tuple(sample_interior(s, rng) for s in self.x_sets),
            y=sample_interior(self.y_set, rng),
        )


# --- bilinear showcase -----------------------------------------------------


def bilinear_problem(A, mode: str = "unconstrained", radius: float = 10.0) -> MinMaxProblem:
    """min_x max_y  y'Ax with a single x block.

    ``mode="unconstrained"`` uses full spaces (the gap is then parameter
    independent); ``mode="ball"`` boxes both variables into origin-centered
    balls so the compactness assumption holds.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or not np.all(np.isfinite(A)):
        raise ValueError("A must be a finite matrix")
    m, n = A.shape
    sigma_max = float(np.linalg.norm(A, 2)) if A.size else 0.0

    def f(x_blocks, y):
        return float(y @ A @ x_blocks[0])

    def grad_x(i, x_blocks, y):
        return A.T @ y

    def grad_y(x_blocks, y):
        return A @ x_blocks[0]

    if mode == "unconstrained":
        x_set, y_set = FullSpace(n), FullSpace(m)
    elif mode == "ball":
        x_set = Ball(np.zeros(n), radius)
        y_set = Ball(np.zeros(m), radius)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return MinMaxProblem(
        name="bilinear",
        block_dims=(n,),
        y_dim=m,
        regime=Regime(RegimeKind.LINEAR),
        f=f,
        grad_x=grad_x,
        grad_y=grad_y,
        x_sets=(x_set,),
        y_set=y_set,
        L_x=(0.0,),  # grad_x does not depend on x
        L_y=sigma_max,
    )


# --- interference channel models -------------------------------------------


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """K-user, N-channel interference network, optionally with a jammer.

    ``gains[l, k, n]`` is the power gain from transmitter l to receiver k
    on channel n; ``jam_gains[k, n]`` from the jammer to receiver k.
    """

    gains: np.ndarray        # (K, K, N)
    jam_gains: np.ndarray    # (K, N)
    sigma2: float
    power_budget: float      # per-user total power
    jammer_budget: float

    def __post_init__(self):
        g = np.array(self.gains, dtype=float)
        j = np.array(self.jam_gains, dtype=float)
        if g.ndim != 3 or g.shape[0] != g.shape[1]:
            raise ValueError("gains must have shape (K, K, N)")
        if j.shape != (g.shape[0], g.shape[2]):
            raise ValueError("jam_gains must have shape (K, N)")
        if np.any(g < 0) or np.any(j < 0):
            raise ValueError("gains must be nonnegative")
        if not self.sigma2 > 0:
            raise ValueError("noise power must be positive")
        if not (self.power_budget > 0 and self.jammer_budget > 0):
            raise ValueError("budgets must be positive")
        g.setflags(write=False)
        j.setflags(write=False)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "jam_gains", j)

    @property
    def K(self) -> int:
        return self.gains.shape[0]

    @property
    def N(self) -> int:
        return self.gains.shape[2]


def rayleigh_channel(
    n_users: int,
    n_channels: int,
    snr_db: float,
    seed: int,
    with_jammer: bool = True,
) -> ChannelModel:
    """Uncorrelated fading draw: gains are |h|^2 for complex unit-variance
    Gaussian coefficients.  The user budget is 10**(snr_db/10); with a
    jammer the unit noise budget is split as sigma^2 = 1/2 plus jammer
    power N/2, without one the full sigma^2 = 1 stays thermal."""
    rng = np.random.default_rng(seed)

    def draw(shape):
        h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        return np.abs(h) ** 2

    gains = draw((n_users, n_users, n_channels))
    if with_jammer:
        jam = draw((n_users, n_channels))
        sigma2, p0 = 0.5, n_channels / 2.0
    else:
        jam = np.zeros((n_users, n_channels))
        sigma2, p0 = 1.0, 1e-12  # budget unused; keep the model valid
    return ChannelModel(
        gains=gains,
        jam_gains=jam,
        sigma2=sigma2,
        power_budget=10.0 ** (snr_db / 10.0),
        jammer_budget=max(p0, 1e-12),
    )


def designed_channel(
    n_users: int = 3,
    n_channels: int = 4,
    direct_gain: float = 1.0,
    cross_gain: float = 0.02,
    jam_gain: float = 0.8,
    sigma2: float = 1.0,
    power_budget: float = 16.0,
    jammer_budget: float = 0.8,
    jitter: float = 0.1,
    seed: int = 1,
) -> ChannelModel:
    """Well-conditioned near-deterministic network.

    Strong direct links, weak cross interference and uniform jammer gains
    keep the jammer objective's curvature comparable across the operating
    region, which keeps the admissible step sizes practical.  A small
    jitter breaks exact symmetry.
    """
    rng = np.random.default_rng(seed)
    gains = np.full((n_users, n_users, n_channels), cross_gain)
    for k in range(n_users):
        gains[k, k, :] = direct_gain
    gains *= 1.0 + jitter * rng.uniform(-1.0, 1.0, size=gains.shape)
    jam = jam_gain * (1.0 + jitter * rng.uniform(-1.0, 1.0, size=(n_users, n_channels)))
    return ChannelModel(
        gains=gains,
        jam_gains=jam,
        sigma2=sigma2,
        power_budget=power_budget,
        jammer_budget=jammer_budget,
    )


def _sinr_parts(model: ChannelModel, X: np.ndarray, y: np.ndarray):
    """Interference-plus-noise S[k, n] and desired power D[k, n]."""
    gd = np.einsum("kkn->kn", model.gains)
    total = np.einsum("jkn,jn->kn", model.gains, X)
    S = model.sigma2 + total - gd * X + model.jam_gains * y
    D = gd * X
    if np.any(S < model.sigma2 * 0.5):
        raise ValueError("SINR denominator collapsed; infeasible powers")
    return S, D, gd


def _stack(x_blocks) -> np.ndarray:
    return np.stack([np.asarray(b, dtype=float) for b in x_blocks])


def user_rates(model: ChannelModel, x_blocks, y=None) -> np.ndarray:
    """Per-user achievable rates (natural log) at the given powers."""
    X = _stack(x_blocks)
    if y is None:
        y = np.zeros(model.N)
    S, D, _ = _sinr_parts(model, X, np.asarray(y, dtype=float))
    return np.log1p(D / S).sum(axis=1)


def sum_rate(model: ChannelModel, x_blocks, y=None) -> float:
    return float(user_rates(model, x_blocks, y).sum())


def _grad_rates_common(model: ChannelModel, X: np.ndarray, y: np.ndarray):
    S, D, gd = _sinr_parts(model, X, y)
    W = 1.0 / S - 1.0 / (S + D)  # rate loss sensitivity of receiver (k, n)
    return S, D, gd, W


def _jamming_grad_x_full(model, X, y):
    S, D, gd, W = _grad_rates_common(model, X, y)
    # d f / d X[i, n]: own-rate term plus interference inflicted on others.
    cross = np.einsum("ikn,kn->in", model.gains, W)
    return -gd / (S + D) + cross - gd * W


def _estimate_block_lipschitz(model, problem_grad, sets, n_pairs=400):
    """Max sampled ratio ||grad(z1) - grad(z2)|| / ||z1 - z2|| per block,
    mixing long-range and short-range pairs, times a 1.5 safety factor."""
    rng = np.random.default_rng(_ESTIMATION_SEED)
    K = len(sets[0])
    best = np.zeros(K)
    best_y = 0.0
    for t in range(n_pairs):
        x1 = [sample_interior(s, rng) for s in sets[0]]
        y1 = sample_interior(sets[1], rng)
        if t % 2 == 0:
            x2 = [sample_interior(s, rng) for s in sets[0]]
            y2 = sample_interior(sets[1], rng)
        else:
            eps = 1e-4
            x2 = [b + eps * rng.standard_normal(b.size) for b in x1]
            y2 = y1 + eps * rng.standard_normal(y1.size)
        gx1, gy1 = problem_grad(x1, y1)
        # L_x is w.r.t. x at fixed y; L_y w.r.t. the joint variable.
        gx2, _ = problem_grad(x2, y1)
        _, gy2 = problem_grad(x2, y2)
        dx = np.linalg.norm(np.concatenate(x1) - np.concatenate(x2))
        dz = np.sqrt(dx**2 + np.linalg.norm(y1 - y2) ** 2)
        if dx > 0:
            best = np.maximum(best, np.linalg.norm(gx1 - gx2, axis=1) / dx)
        if dz > 0:
            best_y = max(best_y, np.linalg.norm(gy1 - gy2) / dz)
    return tuple(1.5 * best), 1.5 * best_y


def jamming_problem(model: ChannelModel) -> MinMaxProblem:
    """Sum-rate minimization by a jammer against K power-controlling users.

    One block of N channel powers per user under a per-user total budget;
    the jammer's y allocates its own budget across channels.  The jammer
    objective is strongly concave over the operating region; its modulus
    is estimated by sampling the (diagonal) second derivative in y.
    """
    K, N = model.K, model.N
    x_sets = tuple(BudgetSimplex(model.power_budget, N) for _ in range(K))
    y_set = BudgetSimplex(model.jammer_budget, N)

    def f(x_blocks, y):
        X = _stack(x_blocks)
        S, D, _ = _sinr_parts(model, X, np.asarray(y, dtype=float))
        return float(-np.log1p(D / S).sum())

    def grad_x(i, x_blocks, y):
        X = _stack(x_blocks)
        return _jamming_grad_x_full(model, X, np.asarray(y, dtype=float))[i]

    def grad_y(x_blocks, y):
        X = _stack(x_blocks)
        S, D, gd, W = _grad_rates_common(model, X, np.asarray(y, dtype=float))
        return np.einsum("kn,kn->n", model.jam_gains, W)

    def both_grads(x_blocks, y):
        X = _stack(x_blocks)
        S, D, gd, W = _grad_rates_common(model, X, y)
        gx = _jamming_grad_x_full(model, X, y)
        gy = np.einsum("kn,kn->n", model.jam_gains, W)
        return gx, gy

    def y_curvature(x_blocks, y):
        # The y-Hessian is diagonal: channel n only sees y[n].
        X = _stack(x_blocks)
        S, D, _ = _sinr_parts(model, X, np.asarray(y, dtype=float))
        return np.einsum(
            "kn,kn->n", model.jam_gains**2, 1.0 / S**2 - 1.0 / (S + D) ** 2
        )

    rng = np.random.default_rng(_ESTIMATION_SEED)
    theta_samples = []
    for _ in range(1000):
        xs = [sample_interior(s, rng) for s in x_sets]
        ys = sample_interior(y_set, rng)
        theta_samples.append(y_curvature(xs, ys).min())
    theta = 0.9 * float(min(theta_samples))
    if theta <= 0:
        raise ValueError("sampled jammer curvature is not positive; "
                         "the instance is not strongly concave in y")

    L_x, L_y = _estimate_block_lipschitz(model, both_grads, (x_sets, y_set))
    return MinMaxProblem(
        name="jamming",
        block_dims=(N,) * K,
        y_dim=N,
        regime=Regime(RegimeKind.STRONGLY_CONCAVE, theta=theta),
        f=f,
        grad_x=grad_x,
        grad_y=grad_y,
        x_sets=x_sets,
        y_set=y_set,
        L_x=L_x,
        L_y=L_y,
    )


def maxmin_rate_problem(model: ChannelModel) -> MinMaxProblem:
    """Max-min fair power control as min over powers, max over simplex
    weights of -sum_k y_k R_k(x); linear in y."""
    K, N = model.K, model.N
    x_sets = tuple(BudgetSimplex(model.power_budget, N) for _ in range(K))
    y_set = Simplex(1.0, K)

    def rates_and_parts(x_blocks):
        X = _stack(x_blocks)
        S, D, gd, W = _grad_rates_common(model, X, np.zeros(N))
        R = np.log1p(D / S).sum(axis=1)
        return X, S, D, gd, W, R

    def f(x_blocks, y):
        _, _, _, _, _, R = rates_and_parts(x_blocks)
        return float(-(np.asarray(y) @ R))

    def grad_x_all(x_blocks, y):
        X, S, D, gd, W, R = rates_and_parts(x_blocks)
        y = np.asarray(y, dtype=float)
        # d R_k / d X[i, n] is gd/(S+D) for i == k and -G[i,k,n] W[k,n] off it;
        # the einsum includes the k == i term, which gets swapped for the own one.
        own = -y[:, None] * gd / (S + D)
        cross = np.einsum("ikn,k,kn->in", model.gains, y, W)
        return own + cross - y[:, None] * gd * W

    def grad_x(i, x_blocks, y):
        return grad_x_all(x_blocks, y)[i]

    def grad_y(x_blocks, y):
        _, _, _, _, _, R = rates_and_parts(x_blocks)
        return -R

    def both_grads(x_blocks, y):
        return grad_x_all(x_blocks, y), grad_y(x_blocks, y)

    L_x, L_y = _estimate_block_lipschitz(model, both_grads, (x_sets, y_set))
    return MinMaxProblem(
        name="maxmin",
        block_dims=(N,) * K,
        y_dim=K,
        regime=Regime(RegimeKind.LINEAR),
        f=f,
        grad_x=grad_x,
        grad_y=grad_y,
        x_sets=x_sets,
        y_set=y_set,
        L_x=L_x,
        L_y=L_y,
    )


# --- smooth min-rate surrogate ---------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothMaxProblem:
    """Minimization-free shell: maximize ``objective`` over a product of sets."""

    name: str
    block_dims: tuple[int, ...]
    x_sets: tuple[ConvexSet, ...]
    objective: Callable[[Sequence[np.ndarray]], float]
    grad: Callable[[Sequence[np.ndarray]], list]


def lse_baseline(model: ChannelModel, nu: float) -> SmoothMaxProblem:
    """Log-sum-exp approximation of the min rate, accuracy parameter nu.

    min_k r_k is replaced by -(1/nu) * log2(sum_k 2**(-nu * r_k)), which
    sandwiches the true min within log2(K)/nu from below.  Solved by
    projected gradient ascent (:func:`solve_smooth_max`).
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    K, N = model.K, model.N
    x_sets = tuple(BudgetSimplex(model.power_budget, N) for _ in range(K))

    def _weights(R):
        # Softmin weights with a max-shift overflow guard.
        z = -nu * (R - R.min())
        w = np.exp2(z)
        return w / w.sum()

    def objective(x_blocks):
        R = user_rates(model, x_blocks)
        z = -nu * (R - R.min())
        return float(R.min() - np.log2(np.exp2(z).sum()) / nu)

    def grad(x_blocks):
        X = _stack(x_blocks)
        S, D, gd, W = _grad_rates_common(model, X, np.zeros(N))
        R = np.log1p(D / S).sum(axis=1)
        w = _weights(R)
        own = w[:, None] * gd / (S + D)
        cross = -np.einsum("ikn,k,kn->in", model.gains, w, W)
        diag = np.einsum("k,kn,kn->kn", w, gd, W)
        full = own + cross + diag
        return [full[i] for i in range(K)]

    return SmoothMaxProblem(
        name=f"lse-nu{nu:g}",
        block_dims=(N,) * K,
        x_sets=x_sets,
        objective=objective,
        grad=grad,
    )


def solve_smooth_max(
    problem: SmoothMaxProblem,
    x0=None,
    step: float = 0.05,
    max_iter: int = 3000,
    tol: float = 1e-8,
):
    """Projected gradient ascent with a fixed step; returns (x_blocks, trace)."""
    if x0 is None:
        x = [s.project(np.zeros(d)) for s, d in zip(problem.x_sets, problem.block_dims)]
    else:
        x = [np.asarray(b, dtype=float).copy() for b in x0]
    values = []
    for _ in range(max_iter):
        g = problem.grad(x)
        new = [s.project(b + step * gb) for s, b, gb in zip(problem.x_sets, x, g)]
        move = sum(float(np.sum((a - b) ** 2)) for a, b in zip(new, x)) ** 0.5
        x = new
        values.append(problem.objective(x))
        if move <= tol:
            break
    return x, np.asarray(values)


# --- robust multi-domain learning -------------------------------------------


def logistic_loss(X: np.ndarray, t: np.ndarray, w: np.ndarray) -> float:
    """Mean logistic loss of the linear classifier w on (X, t in {-1, +1})."""
    z = X @ w
    return float(np.mean(np.logaddexp(0.0, -t * z)))


def _logistic_grad(X, t, w):
    z = X @ w
    s = 1.0 / (1.0 + np.exp(t * z))  # sigmoid(-t z)
    return -(X.T @ (t * s)) / X.shape[0]


def two_domain_synthetic(
    seed: int, n_features: int = 6, n_per_domain: int = 160
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Two Gaussian-blob binary classification domains; the second has far
    smaller class separation, so any shared linear model pays a higher
    loss there."""
    rng = np.random.default_rng(seed)
    domains = []
    for sep in (2.0, 0.35):
        t = np.where(rng.uniform(size=n_per_domain) < 0.5, 1.0, -1.0)
        mean = np.zeros(n_features)
        mean[0] = sep
        X = rng.standard_normal((n_per_domain, n_features)) + t[:, None] * mean
        domains.append((X, t))
    return domains


def robust_learning_problem(
    domains: Sequence[tuple[np.ndarray, np.ndarray]],
    lam: float,
    q=None,
) -> MinMaxProblem:
    """Worst-case domain weighting of logistic risks.

    f(x, y) = y'F(x) - (lam/2) * ||y - q||^2 with F the per-domain mean
    losses, y on the probability simplex and q a prior weighting.  The
    quadratic term makes f lam-strongly concave in y, so the strongly
    concave regime applies with theta = lam.
    """
    if len(domains) < 2:
        raise ValueError("need at least two domains")
    if not lam > 0:
        raise ValueError("lam must be positive")
    M = len(domains)
    dim = domains[0][0].shape[1]
    for X, t in domains:
        if X.shape[0] == 0:
            raise ValueError("empty domain")
        if X.shape[1] != dim:
            raise ValueError("all domains must share the feature dimension")
    q = np.full(M, 1.0 / M) if q is None else np.asarray(q, dtype=float)
    if q.shape != (M,) or abs(q.sum() - 1.0) > 1e-8 or np.any(q < 0):
        raise ValueError("q must lie on the probability simplex")

    def losses(w):
        return np.array([logistic_loss(X, t, w) for X, t in domains])

    def f(x_blocks, y):
        y = np.asarray(y, dtype=float)
        return float(y @ losses(x_blocks[0]) - 0.5 * lam * np.sum((y - q) ** 2))

    def grad_x(i, x_blocks, y):
        w = x_blocks[0]
        y = np.asarray(y, dtype=float)
        out = np.zeros(dim)
        for ym, (X, t) in zip(y, domains):
            if ym != 0.0:
                out += ym * _logistic_grad(X, t, w)
        return out

    def grad_y(x_blocks, y):
        return losses(x_blocks[0]) - lam * (np.asarray(y, dtype=float) - q)

    # Logistic curvature is globally bounded: hess <= ||X||^2 / (4 n).
    L_dom = max(np.linalg.norm(X, 2) ** 2 / (4.0 * X.shape[0]) for X, t in domains)
    # F is Lipschitz with the mean row norm; stack with the lam from grad_y.
    L_F = max(float(np.mean(np.linalg.norm(X, axis=1))) for X, t in domains)
    return MinMaxProblem(
        name="robust",
        block_dims=(dim,),
        y_dim=M,
        regime=Regime(RegimeKind.STRONGLY_CONCAVE, theta=lam),
        f=f,
        grad_x=grad_x,
        grad_y=grad_y,
        x_sets=(FullSpace(dim),),
        y_set=Simplex(1.0, M),
        L_x=(L_dom,),
        L_y=float(np.hypot(L_F, lam)),
    )
