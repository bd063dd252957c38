"""Projections and proximity operators.

The solver's x-updates, y-updates and the stationarity gap all reduce to
proximity operators of the form

    argmin over the set of  h(v) + (weight/2) * ||v - anchor||^2

for a small registry of prox-friendly functions h (zero, weighted l1,
weighted squared distance).  Restricting h to this registry keeps every
prox step exact and in closed form; arbitrary closures are deliberately
not supported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FullSpace",
    "Box",
    "Simplex",
    "BudgetSimplex",
    "Ball",
    "ConvexSet",
    "ZeroFn",
    "L1Norm",
    "SquaredL2",
    "ProxFunction",
    "ZERO",
    "project",
    "prox_x",
    "prox_y",
    "sample_interior",
]

FEAS_TOL = 1e-9  # absolute feasibility tolerance for membership checks


def _check_dim(dim: int, v: np.ndarray):
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"vector of shape {v.shape} does not match set dimension {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def _simplex_threshold(v: np.ndarray, scale: float) -> np.ndarray:
    # Sort-based projection onto {x >= 0, sum(x) = scale}, O(n log n).
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    active = u - (css - scale) / idx > 0
    k = int(idx[active][-1])
    tau = (css[k - 1] - scale) / k
    return np.maximum(v - tau, 0.0)


@dataclass(frozen=True)
class FullSpace:
    """No constraint; projection is the identity."""

    dim: int

    def project(self, v):
        return _check_dim(self.dim, v).copy()

    def contains(self, v, tol=FEAS_TOL):
        _check_dim(self.dim, v)
        return True

    def center(self):
        return np.zeros(self.dim)


@dataclass(frozen=True, eq=False)
class Box:
    """Coordinate-wise bounds lower <= x <= upper."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.array(self.lower, dtype=float))
        hi = np.atleast_1d(np.array(self.upper, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have matching shapes")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper coordinate-wise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def project(self, v):
        return np.clip(_check_dim(self.dim, v), self.lower, self.upper)

    def contains(self, v, tol=FEAS_TOL):
        v = _check_dim(self.dim, v)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))

    def center(self):
        return (self.lower + self.upper) / 2.0


@dataclass(frozen=True)
class Simplex:
    """{x >= 0, sum(x) = scale}."""

    scale: float
    dim: int

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"simplex scale must be positive, got {self.scale}")

    def project(self, v):
        return _simplex_threshold(_check_dim(self.dim, v), self.scale)

    def contains(self, v, tol=FEAS_TOL):
        v = _check_dim(self.dim, v)
        return bool(np.all(v >= -tol) and abs(v.sum() - self.scale) <= tol * self.dim)

    def center(self):
        return np.full(self.dim, self.scale / self.dim)


@dataclass(frozen=True)
class BudgetSimplex:
    """{x >= 0, sum(x) <= budget}: nonnegative allocations under a total budget."""

    budget: float
    dim: int

    def __post_init__(self):
        if not (np.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be positive, got {self.budget}")

    def project(self, v):
        v = _check_dim(self.dim, v)
        clipped = np.maximum(v, 0.0)
        if clipped.sum() <= self.budget:
            return clipped
        # Budget active: projection coincides with the equality-simplex one.
        return _simplex_threshold(v, self.budget)

    def contains(self, v, tol=FEAS_TOL):
        v = _check_dim(self.dim, v)
        return bool(np.all(v >= -tol) and v.sum() <= self.budget + tol * self.dim)

    def center(self):
        return np.full(self.dim, self.budget / (2.0 * self.dim))


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball of given center and radius."""

    center_point: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.center_point, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "center_point", c)
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self):
        return self.center_point.size

    def project(self, v):
        v = _check_dim(self.dim, v)
        d = v - self.center_point
        norm = np.linalg.norm(d)
        if norm <= self.radius:
            return v.copy()
        return self.center_point + d * (self.radius / norm)

    def contains(self, v, tol=FEAS_TOL):
        v = _check_dim(self.dim, v)
        return bool(np.linalg.norm(v - self.center_point) <= self.radius + tol)

    def center(self):
        return self.center_point.copy()


ConvexSet = Union[FullSpace, Box, Simplex, BudgetSimplex, Ball]


def project(cset: ConvexSet, v) -> np.ndarray:
    """Euclidean projection onto the set.  Idempotent; output is feasible."""
    return cset.project(v)


# --- prox-friendly function registry -------------------------------------


@dataclass(frozen=True)
class ZeroFn:
    """The zero function; its prox is plain projection."""

    def value(self, v) -> float:
        return 0.0


@dataclass(frozen=True)
class L1Norm:
    """weight * ||v||_1."""

    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("l1 weight must be nonnegative")

    def value(self, v) -> float:
        return self.weight * float(np.abs(v).sum())


@dataclass(frozen=True, eq=False)
class SquaredL2:
    """(weight / 2) * ||v - anchor||^2 (anchor defaults to the origin)."""

    weight: float
    anchor: np.ndarray | None = None

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("quadratic weight must be nonnegative")
        if self.anchor is not None:
            a = np.atleast_1d(np.array(self.anchor, dtype=float))
            a.setflags(write=False)
            object.__setattr__(self, "anchor", a)

    def _anchor(self, dim):
        return np.zeros(dim) if self.anchor is None else self.anchor

    def value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return 0.5 * self.weight * float(np.sum((v - self._anchor(v.size)) ** 2))


ProxFunction = Union[ZeroFn, L1Norm, SquaredL2]

ZERO = ZeroFn()


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_x(h: ProxFunction, cset: ConvexSet, beta: float, v) -> np.ndarray:
    """argmin over the set of h(x) + (beta/2) * ||x - v||^2.

    Exact closed forms for every registered (h, set) combination; with
    h == 0 this reduces to :func:`project`.
    """
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"prox weight must be positive, got {beta}")
    v = np.asarray(v, dtype=float)
    if isinstance(h, ZeroFn):
        return cset.project(v)
    if isinstance(h, SquaredL2):
        # Two quadratics merge into one centered at the weighted average.
        a = h._anchor(v.size)
        w = h.weight
        return cset.project((w * a + beta * v) / (w + beta))
    if isinstance(h, L1Norm):
        t = h.weight / beta
        if isinstance(cset, FullSpace):
            return _soft_threshold(v, t)
        if isinstance(cset, Box):
            # Separable 1-D problems: soft-threshold then clip.
            return np.clip(_soft_threshold(v, t), cset.lower, cset.upper)
        if isinstance(cset, (Simplex, BudgetSimplex)):
            # On x >= 0 the l1 term is linear, a constant shift of the anchor.
            return cset.project(v - t)
        raise ValueError(f"l1 prox not registered for set {type(cset).__name__}")
    raise ValueError(f"unregistered prox function {type(h).__name__}")


def prox_y(g: ProxFunction, cset: ConvexSet, rho: float, w) -> np.ndarray:
    """argmax over the set of -g(y) - (1/(2*rho)) * ||y - w||^2.

    The maximization form of :func:`prox_x` with weight 1/rho; with
    g == 0 it reduces to projection.
    """
    if not (np.isfinite(rho) and rho > 0):
        raise ValueError(f"rho must be positive, got {rho}")
    return prox_x(g, cset, 1.0 / rho, w)


def sample_interior(cset: ConvexSet, rng: np.random.Generator) -> np.ndarray:
    """A random point safely inside the set (used by gradient checks and
    constant estimation; not uniform)."""
    if isinstance(cset, FullSpace):
        return rng.standard_normal(cset.dim)
    if isinstance(cset, Box):
        u = rng.uniform(0.1, 0.9, size=cset.dim)
        return cset.lower + u * (cset.upper - cset.lower)
    if isinstance(cset, Simplex):
        w = rng.dirichlet(np.full(cset.dim, 3.0))
        return cset.scale * w
    if isinstance(cset, BudgetSimplex):
        w = rng.dirichlet(np.full(cset.dim, 3.0))
        return cset.budget * rng.uniform(0.3, 0.9) * w
    if isinstance(cset, Ball):
        d = rng.standard_normal(cset.dim)
        d /= np.linalg.norm(d)
        r = cset.radius * 0.9 * rng.uniform() ** (1.0 / cset.dim)
        return cset.center_point + r * d
    raise ValueError(f"unknown set {type(cset).__name__}")
