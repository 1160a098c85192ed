"""Data-independent oracles feeding the evolution loop.

The random API draws the initial synthetic dataset; the variation API maps
each point z to the multiset {z} together with two projected Gaussian
perturbations per noise level, with level scales

    sigma_l = alpha * 2^(l-1) / (sqrt(pi) * ((sqrt(d) + ln 2)^2 + ln 2)),

for l = 1..L and L = ceil(log2(diam / alpha)). Variation oracles are duck
typed: anything exposing ``variations``, ``variations_dataset`` and
``per_point_count`` can drive a run, so alternative oracles satisfying the
same contraction contract can be plugged in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain, as_point
from .hyperparams import LN2, variation_levels
from .measures import as_dataset

__all__ = [
    "VariationApiSpec",
    "SingleScaleGaussianApi",
    "GammaVAlphaContract",
    "InitSpec",
    "UniformInit",
    "PointMassInit",
    "CopyInit",
    "InterpolateInit",
    "random_api",
    "variation_api",
    "variation_api_dataset",
    "contraction_estimate",
    "structural_contract_holds",
]


def _level_scales(alpha: float, d: int, levels: int) -> np.ndarray:
    denom = math.sqrt(math.pi) * ((math.sqrt(d) + LN2) ** 2 + LN2)
    return alpha * 2.0 ** np.arange(levels, dtype=np.float64) / denom


@dataclass(frozen=True)
class VariationApiSpec:
    """Multi-scale Gaussian variation oracle on a convex compact domain."""

    alpha: float
    domain: Domain
    levels: int = field(init=False)
    sigmas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive")
        levels = variation_levels(self.domain.diameter(), self.alpha)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(
            self, "sigmas", _level_scales(self.alpha, self.domain.dim, levels)
        )

    @property
    def per_point_count(self) -> int:
        return 2 * self.levels + 1

    def variations(self, z, rng: np.random.Generator) -> np.ndarray:
        """The point itself plus two projected Gaussian copies per level."""
        z = as_point(z)
        if not self.domain.contains(z):
            raise ValueError("variation input lies outside the domain")
        return self.variations_dataset(z.reshape(1, -1), rng)

    def variations_dataset(self, S, rng: np.random.Generator) -> np.ndarray:
        """Concatenated variations of every point, input order preserved."""
        S = as_dataset(S)
        n, d = S.shape
        v = self.per_point_count
        out = np.empty((n, v, d))
        out[:, 0, :] = S
        if self.levels:
            noise = rng.standard_normal((n, self.levels, 2, d))
            noise *= self.sigmas[None, :, None, None]
            out[:, 1:, :] = (S[:, None, None, :] + noise).reshape(n, 2 * self.levels, d)
        flat = out.reshape(n * v, d)
        return self.domain.project_batch(flat)


@dataclass(frozen=True)
class SingleScaleGaussianApi:
    """One-level Gaussian oracle: {z} plus k projected copies at one scale.

    Exists to exercise the evolution loop with a different oracle satisfying
    the same structural contract.
    """

    scale: float
    copies: int
    domain: Domain

    @property
    def per_point_count(self) -> int:
        return self.copies + 1

    def variations(self, z, rng: np.random.Generator) -> np.ndarray:
        z = as_point(z)
        return self.variations_dataset(z.reshape(1, -1), rng)

    def variations_dataset(self, S, rng: np.random.Generator) -> np.ndarray:
        S = as_dataset(S)
        n, d = S.shape
        out = np.empty((n, self.copies + 1, d))
        out[:, 0, :] = S
        out[:, 1:, :] = S[:, None, :] + rng.normal(0.0, self.scale, (n, self.copies, d))
        return self.domain.project_batch(out.reshape(-1, d))


@dataclass(frozen=True)
class GammaVAlphaContract:
    """Contract for a variation oracle: expected (1-gamma) contraction toward
    any target at distances above alpha, at most v variations per point,
    and the point always among its own variations."""

    gamma: float
    v: int
    alpha: float

    def __post_init__(self):
        if not (0 < self.gamma < 1) or self.v < 1 or not (self.alpha > 0):
            raise ValueError("require gamma in (0,1), v >= 1, alpha > 0")


def structural_contract_holds(
    api, contract: GammaVAlphaContract, points, rng: np.random.Generator
) -> bool:
    """Check the non-statistical half of the contract on sample points:
    each point appears among its own variations and the count is within v."""
    points = as_dataset(points)
    for z in points:
        vs = api.variations(z, rng)
        if vs.shape[0] > contract.v:
            return False
        if not np.any(np.all(vs == z, axis=1)):
            return False
    return True


class InitSpec:
    """Marker base for initial-dataset specifications."""


@dataclass(frozen=True)
class UniformInit(InitSpec):
    """Uniform over the domain (ball or box)."""


@dataclass(frozen=True)
class PointMassInit(InitSpec):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))


@dataclass(frozen=True)
class CopyInit(InitSpec):
    """Start from an explicit dataset, returned exactly (its own size)."""

    dataset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dataset", as_dataset(self.dataset))


@dataclass(frozen=True)
class InterpolateInit(InitSpec):
    """Start from the dataset contracted toward the domain center by 1-2*beta."""

    beta: float
    dataset: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must lie in [0, 1]")
        object.__setattr__(self, "dataset", as_dataset(self.dataset))


def random_api(domain: Domain, n_s: int, init: InitSpec, rng: np.random.Generator) -> np.ndarray:
    """Initial synthetic dataset. Sampling inits return exactly n_s points;
    dataset-based inits (copy / interpolate) return one point per input."""
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if isinstance(init, UniformInit):
        return domain.sample_uniform(n_s, rng)
    if isinstance(init, PointMassInit):
        if not domain.contains(init.point):
            raise ValueError("point mass lies outside the domain")
        return np.tile(init.point, (n_s, 1))
    if isinstance(init, CopyInit):
        if not domain.contains_all(init.dataset):
            raise ValueError("copied dataset has points outside the domain")
        return init.dataset.copy()
    if isinstance(init, InterpolateInit):
        center = domain.center()
        points = center + (1.0 - 2.0 * init.beta) * (init.dataset - center)
        if not domain.contains_all(points):
            raise ValueError("interpolated dataset has points outside the domain")
        return points
    raise TypeError(f"unknown init spec: {type(init).__name__}")


def variation_api(spec, z, rng: np.random.Generator) -> np.ndarray:
    return spec.variations(z, rng)


def variation_api_dataset(spec, S, rng: np.random.Generator) -> np.ndarray:
    return spec.variations_dataset(S, rng)


def contraction_estimate(
    spec, z1, z2, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of min_{z in variations(z1)} |z - z2|."""
    if trials < 100:
        raise ValueError("need at least 100 trials for a meaningful estimate")
    z1 = as_point(z1)
    z2 = as_point(z2)
    d = z1.shape[0]
    mins = np.empty(trials)
    # Batch the trials to keep vectorized draws bounded in memory.
    batch = max(1, min(trials, 2 ** 22 // max(1, spec.per_point_count * d)))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        tiled = np.tile(z1, (b, 1))
        vs = spec.variations_dataset(tiled, rng).reshape(b, spec.per_point_count, d)
        dist = np.linalg.norm(vs - z2, axis=2)
        mins[done : done + b] = dist.min(axis=1)
        done += b
    mean = float(mins.mean())
    stderr = float(mins.std(ddof=1) / math.sqrt(trials))
    return mean, stderr
