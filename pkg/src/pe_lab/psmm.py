"""One-shot signed-measure mechanism over grid partitions.

Partition the domain into axis-aligned grid cells, privatize the cell
counts with Gaussian noise, project the resulting signed measure onto the
probability simplex in BL distance, place the projected mass on one
representative point per cell, and sample. The nearest-neighbor histogram
over the representatives coincides with direct cell counting whenever the
partition is the Voronoi partition of those representatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ball, Domain
from .measures import DiscreteMeasure, as_dataset, nn_histogram, sample_with_replacement
from .transport import bl_project_simplex

__all__ = [
    "PartitionSpec",
    "grid_partition",
    "psmm_measure",
    "psmm_run",
    "psmm_as_nn_histogram",
    "count_noise_scale",
]


@dataclass(frozen=True)
class PartitionSpec:
    """Axis-aligned grid cells intersected with the domain.

    Cells with empty intersection are dropped; every remaining cell holds
    one representative point inside both the cell and the domain.
    ``max_cell_diameter`` is the full grid-cell diameter, an upper bound on
    the diameter of every intersection.
    """

    domain: Domain
    grid_k: int
    cell_lo: np.ndarray  # (m, d)
    cell_hi: np.ndarray  # (m, d)
    representatives: np.ndarray  # (m, d)
    max_cell_diameter: float
    flat_to_cell: np.ndarray = field(repr=False)  # (k^d,) lookup, -1 = dropped

    @property
    def size(self) -> int:
        return self.representatives.shape[0]

    def assign(self, points) -> np.ndarray:
        """Cell index of each point; raises if a point hits a dropped cell."""
        points = as_dataset(points)
        lo, hi = self.domain.bounding_box()
        step = (hi - lo) / self.grid_k
        idx = np.floor((points - lo) / step).astype(np.int64)
        np.clip(idx, 0, self.grid_k - 1, out=idx)
        flat = np.ravel_multi_index(idx.T, (self.grid_k,) * self.domain.dim)
        cells = self.flat_to_cell[flat]
        if np.any(cells < 0):
            raise ValueError("a point falls in a cell outside the partition")
        return cells


def grid_partition(domain: Domain, m_target: int) -> PartitionSpec:
    """Build a grid of ceil(m_target^(1/d))^d cells over the bounding box,
    keeping only cells that meet the domain."""
    if m_target < 1:
        raise ValueError("m_target must be at least 1")
    d = domain.dim
    k = max(1, math.ceil(m_target ** (1.0 / d)))
    lo, hi = domain.bounding_box()
    step = (hi - lo) / k
    max_diam = float(np.linalg.norm(step))
    center = domain.center()

    grid_axes = [np.arange(k)] * d
    mesh = np.stack(np.meshgrid(*grid_axes, indexing="ij"), axis=-1).reshape(-1, d)
    cell_lo = lo + mesh * step
    cell_hi = cell_lo + step

    # Closest point of each cell to the domain center; for a ball this
    # decides nonemptiness of the intersection exactly.
    clamp = np.clip(center, cell_lo, cell_hi)
    if isinstance(domain, Ball):
        keep = np.linalg.norm(clamp - center, axis=1) <= domain.radius + 1e-12
    else:
        keep = np.ones(cell_lo.shape[0], dtype=bool)

    kept_lo = cell_lo[keep]
    kept_hi = cell_hi[keep]
    centers = 0.5 * (kept_lo + kept_hi)
    # Cells are half-open boxes [lo, hi) under assignment, so edge-touching
    # representatives are pulled strictly inside by a relative margin.
    margin = 1e-12 * step
    reps = np.empty_like(centers)
    for i, c in enumerate(centers):
        if domain.contains(c):
            reps[i] = c
        else:
            projected = domain.project(c)
            inside_cell = np.all(projected >= kept_lo[i] - 1e-12) and np.all(
                projected <= kept_hi[i] + 1e-12
            )
            if not inside_cell:
                # The projected center left the cell; use the cell point
                # closest to the domain center, which is inside both.
                projected = np.clip(center, kept_lo[i], kept_hi[i])
            reps[i] = projected
        reps[i] = np.clip(reps[i], kept_lo[i], kept_hi[i] - margin)

    flat_to_cell = np.full(k**d, -1, dtype=np.int64)
    flat_to_cell[np.nonzero(keep)[0]] = np.arange(int(keep.sum()))
    return PartitionSpec(
        domain=domain,
        grid_k=k,
        cell_lo=kept_lo,
        cell_hi=kept_hi,
        representatives=reps,
        max_cell_diameter=max_diam,
        flat_to_cell=flat_to_cell,
    )


def count_noise_scale(eps: float, delta: float) -> float:
    """Standard deviation of the Gaussian count noise: sqrt(ln(1/delta))/eps."""
    if not (eps > 0) or not (0 < delta < 1):
        raise ValueError("require eps > 0 and delta in (0, 1)")
    return math.sqrt(math.log(1.0 / delta)) / eps


def psmm_measure(
    S,
    partition: PartitionSpec,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    noise_scale: float | None = None,
) -> DiscreteMeasure:
    """Privatized cell-count measure projected onto the simplex.

    Noise is added to every cell count, occupied or not. ``noise_scale``
    overrides the standard calibration (0 gives the noiseless mechanism,
    used by the exactness tests).
    """
    S = as_dataset(S)
    n = S.shape[0]
    scale = count_noise_scale(eps, delta) if noise_scale is None else noise_scale
    counts = np.bincount(partition.assign(S), minlength=partition.size).astype(np.float64)
    noisy = counts + rng.normal(0.0, scale, size=partition.size) if scale > 0 else counts
    signed = DiscreteMeasure(partition.representatives, noisy / n)
    projected, _ = bl_project_simplex(signed, partition.domain.diameter())
    return projected


def psmm_run(
    S,
    partition: PartitionSpec,
    n_s: int,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    noise_scale: float | None = None,
) -> np.ndarray:
    """Full mechanism: privatize counts, project, sample n_s points."""
    measure = psmm_measure(S, partition, eps, delta, rng, noise_scale=noise_scale)
    return sample_with_replacement(measure, n_s, rng)


def psmm_as_nn_histogram(S, representatives) -> np.ndarray:
    """Cell frequencies recovered by nearest-neighbor voting.

    Equals direct cell counting whenever the cells are the Voronoi regions
    of the representatives (boundary points follow the smallest-index rule).
    """
    return nn_histogram(S, representatives)
