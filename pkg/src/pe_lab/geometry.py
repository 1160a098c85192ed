"""Sample spaces: convex compact domains in R^d under the Euclidean metric.

Two domain families are provided, balls and axis-aligned boxes. Both admit
closed-form Euclidean projection (radial scaling and componentwise clamping),
which is all the evolution and partition machinery needs.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Domain", "Ball", "Box", "distance", "as_point"]

# Absolute tolerance for membership checks; projections are exact up to
# floating-point rounding, so anything well above machine epsilon works.
MEMBERSHIP_TOL = 1e-9


def as_point(p) -> np.ndarray:
    """Coerce to a finite 1-D float64 coordinate vector."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"point must be a 1-D coordinate vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    return arr


def distance(a, b) -> float:
    """Euclidean distance between two points of equal dimension."""
    a = as_point(a)
    b = as_point(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


class Domain(ABC):
    """A convex compact subset of R^d with projection and diameter."""

    dim: int

    @abstractmethod
    def project(self, p: np.ndarray) -> np.ndarray:
        """Euclidean projection of ``p`` onto the domain."""

    @abstractmethod
    def diameter(self) -> float:
        """Exact Euclidean diameter."""

    @abstractmethod
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise (lo, hi) of the smallest enclosing axis box."""

    @abstractmethod
    def center(self) -> np.ndarray:
        """A canonical interior point (ball center / box midpoint)."""

    @abstractmethod
    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` i.i.d. uniform points, returned as an (n, d) array."""

    @abstractmethod
    def project_batch(self, points: np.ndarray) -> np.ndarray:
        """Row-wise projection of an (n, d) array."""

    def contains(self, p, tol: float = MEMBERSHIP_TOL) -> bool:
        p = self._check_point(p)
        return bool(np.linalg.norm(p - self.project(p)) <= tol)

    def contains_all(self, points: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        moved = np.linalg.norm(points - self.project_batch(points), axis=1)
        return bool(np.all(moved <= tol))

    def project_points(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.dim:
            raise ValueError(
                f"points dimension {points.shape[1]} != domain dimension {self.dim}"
            )
        return self.project_batch(points)

    def _check_point(self, p) -> np.ndarray:
        p = as_point(p)
        if p.shape[0] != self.dim:
            raise ValueError(f"point dimension {p.shape[0]} != domain dimension {self.dim}")
        return p


@dataclass(frozen=True)
class Ball(Domain):
    """Closed Euclidean ball {x : ||x - center|| <= radius}."""

    center_point: np.ndarray
    radius: float
    dim: int = field(init=False)

    def __post_init__(self):
        c = as_point(self.center_point)
        object.__setattr__(self, "center_point", c)
        object.__setattr__(self, "dim", c.shape[0])
        if not (self.radius > 0):
            raise ValueError("ball radius must be positive")

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_point(p)
        u = p - self.center_point
        norm = np.linalg.norm(u)
        if norm <= self.radius:
            return p
        return self.center_point + u * (self.radius / norm)

    def project_batch(self, points: np.ndarray) -> np.ndarray:
        u = points - self.center_point
        norms = np.linalg.norm(u, axis=1)
        outside = norms > self.radius
        if not np.any(outside):
            return points.copy()
        out = points.copy()
        scale = self.radius / norms[outside]
        out[outside] = self.center_point + u[outside] * scale[:, None]
        return out

    def diameter(self) -> float:
        return 2.0 * self.radius

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center_point - self.radius, self.center_point + self.radius

    def center(self) -> np.ndarray:
        return self.center_point.copy()

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # Direction from an isotropic Gaussian, radius from U^(1/d) scaling.
        d = self.dim
        g = rng.standard_normal((n, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        r = rng.random((n, 1)) ** (1.0 / d)
        return self.center_point + self.radius * r * (g / norms)


@dataclass(frozen=True)
class Box(Domain):
    """Axis-aligned box {x : lo <= x <= hi componentwise}."""

    lo: np.ndarray
    hi: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        lo = as_point(self.lo)
        hi = as_point(self.hi)
        if lo.shape != hi.shape:
            raise ValueError("box corners must have the same dimension")
        if not np.all(lo < hi):
            raise ValueError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "dim", lo.shape[0])

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_point(p)
        return np.clip(p, self.lo, self.hi)

    def project_batch(self, points: np.ndarray) -> np.ndarray:
        return np.clip(points, self.lo, self.hi)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lo.copy(), self.hi.copy()

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, self.dim))
        return self.lo + u * (self.hi - self.lo)
