"""Dense real vectors and exact Euclidean projections onto simple convex sets.

The sets implemented here (boxes, balls, affine subspaces, halfspaces) all
admit closed-form projections, so distances and projection-based identities
can be evaluated to machine precision. Boxes, affine subspaces and halfspaces
are polyhedral; balls have a C^2 boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEMBERSHIP_TOL = 1e-9


class DimensionMismatchError(ValueError):
    pass


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite coordinates."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


class ConvexSet:
    """Base class for exactly-projectable closed convex sets."""

    dim: int

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = as_vector(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"vector of dim {x.shape[0]} vs set of dim {self.dim}")
        return x

    def dist(self, x: np.ndarray) -> float:
        x = self._check_dim(x)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.dist(x) <= tol


@dataclass(frozen=True)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = as_vector(self.lower), as_vector(self.upper)
        if lo.shape != up.shape:
            raise DimensionMismatchError("box bounds have different dimensions")
        if np.any(lo > up):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        d = x - self.center
        r = np.linalg.norm(d)
        if r <= self.radius:
            return x.copy()
        return self.center + (self.radius / r) * d


@dataclass(frozen=True)
class AffineSubspace(ConvexSet):
    """offset + span(directions); directions are pairwise orthonormal rows.

    An empty direction list encodes the single point {offset}.
    """

    offset: np.ndarray
    directions: np.ndarray = field(default=None)

    def __post_init__(self):
        off = as_vector(self.offset)
        if self.directions is None:
            dirs = np.zeros((0, off.shape[0]))
        else:
            dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if dirs.shape[0] and dirs.shape[1] != off.shape[0]:
            raise DimensionMismatchError("direction dimension mismatch")
        if dirs.shape[0]:
            gram = dirs @ dirs.T
            if not np.allclose(gram, np.eye(dirs.shape[0]), atol=1e-9):
                raise ValueError("directions must be pairwise orthonormal")
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "directions", dirs)

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        d = x - self.offset
        if self.directions.shape[0] == 0:
            return self.offset.copy()
        return self.offset + self.directions.T @ (self.directions @ d)


@dataclass(frozen=True)
class Halfspace(ConvexSet):
    """{x : <normal, x> <= offset} with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        nrm = as_vector(self.normal)
        if abs(np.linalg.norm(nrm) - 1.0) > 1e-9:
            raise ValueError("halfspace normal must have unit norm")
        object.__setattr__(self, "normal", nrm)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        excess = float(self.normal @ x) - self.offset
        if excess <= 0:
            return x.copy()
        return x - excess * self.normal


def project(S: ConvexSet, x) -> np.ndarray:
    return S.project(as_vector(x))


def dist(S: ConvexSet, x) -> float:
    return S.dist(as_vector(x))


def projection_variational_check(S: ConvexSet, x, u) -> float:
    """<x - p, u - p> with p the projection of x; nonpositive for any u in S."""
    x, u = as_vector(x), as_vector(u)
    if not S.contains(u):
        raise ValueError("u is not a member of the set")
    p = S.project(x)
    return float((x - p) @ (u - p))


def sample_point(S: ConvexSet, rng: np.random.Generator) -> np.ndarray:
    """Draw a point of S (not uniform; used for property sampling)."""
    if isinstance(S, Box):
        return S.lower + rng.random(S.dim) * (S.upper - S.lower)
    if isinstance(S, Ball):
        d = rng.standard_normal(S.dim)
        n = np.linalg.norm(d)
        if n == 0:
            return S.center.copy()
        radius = S.radius * rng.random() ** (1.0 / S.dim)
        return S.center + (radius / n) * d
    if isinstance(S, AffineSubspace):
        k = S.directions.shape[0]
        if k == 0:
            return S.offset.copy()
        return S.offset + S.directions.T @ rng.standard_normal(k)
    if isinstance(S, Halfspace):
        x = rng.standard_normal(S.dim)
        return S.project(x)
    raise TypeError(f"unsupported set type {type(S)!r}")
