"""Datasets, discrete (signed) measures, and the nearest-neighbor histogram.

A dataset is an (n, d) float64 array of points; order matters and duplicates
are kept. Discrete measures carry an explicit finite support plus a real
weight vector, which may be signed (noisy histograms) or a probability
vector (empirical distributions, projected histograms).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import Domain

__all__ = [
    "DiscreteMeasure",
    "as_dataset",
    "empirical",
    "nn_histogram",
    "squared_distance_matrix",
    "sample_with_replacement",
    "load_dataset_csv",
    "save_dataset_csv",
]

PROB_WEIGHT_TOL = 1e-12
PROB_SUM_TOL = 1e-9


def as_dataset(points) -> np.ndarray:
    """Coerce to an (n, d) float64 array with finite entries."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"dataset must be a nonempty (n, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("dataset has non-finite coordinates")
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finitely supported real measure: support points plus weights."""

    support: np.ndarray  # (m, d)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        support = as_dataset(self.support)
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1 or weights.shape[0] != support.shape[0]:
            raise ValueError("weights must be a vector matching the support length")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return bool(
            np.all(self.weights >= -PROB_WEIGHT_TOL)
            and abs(self.weights.sum() - 1.0) <= PROB_SUM_TOL
        )

    def minus(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        """Signed difference on the concatenated support (no deduplication)."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        support = np.concatenate([self.support, other.support])
        weights = np.concatenate([self.weights, -other.weights])
        return DiscreteMeasure(support, weights)

    def collapse_duplicates(self) -> "DiscreteMeasure":
        """Merge bit-identical support points, summing their weights.

        The represented measure is unchanged; resampled datasets can carry
        many repeats, and transport solves scale with the support size.
        """
        unique, inverse = np.unique(self.support, axis=0, return_inverse=True)
        if unique.shape[0] == self.size:
            return self
        weights = np.zeros(unique.shape[0])
        np.add.at(weights, inverse.ravel(), self.weights)
        return DiscreteMeasure(unique, weights)


def empirical(S) -> DiscreteMeasure:
    """Empirical distribution: each point of the dataset gets weight 1/n."""
    S = as_dataset(S)
    n = S.shape[0]
    return DiscreteMeasure(S, np.full(n, 1.0 / n))


def squared_distance_matrix(S: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, entry (i, j) = ||S[i]-V[j]||^2.

    Computed from coordinate differences directly (not the dot-product
    expansion) so results are reproducible, never negative, and ties are
    resolved on bit-identical values.
    """
    S = as_dataset(S)
    V = as_dataset(V)
    if S.shape[1] != V.shape[1]:
        raise ValueError("dimension mismatch between datasets")
    n, m, d = S.shape[0], V.shape[0], S.shape[1]
    # Chunk source rows so the (chunk, m, d) intermediate stays modest.
    max_elems = 2 ** 25
    chunk = max(1, min(n, max_elems // max(1, m * d)))
    out = np.empty((n, m))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        diff = S[start:stop, None, :] - V[None, :, :]
        out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def nn_indices(S: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Index of each source point's nearest candidate, smallest index on ties."""
    d2 = squared_distance_matrix(S, V)
    # argmin returns the first (lowest-index) minimizer, the required tie rule.
    return np.argmin(d2, axis=1)


def nn_histogram(S, V) -> np.ndarray:
    """Nearest-neighbor voting histogram over the candidate set V.

    Entry j is the fraction of points in S whose nearest candidate (ties
    broken toward the smallest index) is V[j]. Entries are exact multiples
    of 1/|S| and sum to 1.
    """
    S = as_dataset(S)
    V = as_dataset(V)
    idx = nn_indices(S, V)
    counts = np.bincount(idx, minlength=V.shape[0]).astype(np.float64)
    return counts / S.shape[0]


def sample_with_replacement(mu: DiscreteMeasure, n_s: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n_s i.i.d. support points according to the measure's weights."""
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if not mu.is_probability:
        raise ValueError("sampling requires a probability measure")
    p = np.clip(mu.weights, 0.0, None)
    p = p / p.sum()
    idx = rng.choice(mu.size, size=n_s, p=p)
    return mu.support[idx]


def load_dataset_csv(
    path,
    domain: Domain | None = None,
    project_outliers: bool = False,
) -> np.ndarray:
    """Read a dataset from CSV: one row per point, d numeric columns.

    A single leading non-numeric row is treated as a header. When a domain
    is given, every point is checked for membership; out-of-domain points
    raise unless ``project_outliers`` is set, in which case they are
    projected onto the domain.
    """
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row and any(cell.strip() for cell in row):
                rows.append([cell.strip() for cell in row])
    if not rows:
        raise ValueError(f"empty dataset file: {path}")

    def parse(row):
        try:
            return [float(cell) for cell in row]
        except ValueError:
            return None

    first = parse(rows[0])
    data_rows = rows if first is not None else rows[1:]
    if not data_rows:
        raise ValueError(f"no data rows in {path}")
    parsed = []
    width = len(data_rows[0])
    for i, row in enumerate(data_rows):
        values = parse(row)
        if values is None:
            raise ValueError(f"non-numeric entry at data row {i} of {path}")
        if len(values) != width:
            raise ValueError(f"inconsistent column count at data row {i} of {path}")
        parsed.append(values)
    points = as_dataset(np.array(parsed))

    if domain is not None:
        if points.shape[1] != domain.dim:
            raise ValueError(
                f"dataset dimension {points.shape[1]} != domain dimension {domain.dim}"
            )
        if project_outliers:
            points = domain.project_points(points)
        elif not domain.contains_all(points):
            raise ValueError(f"dataset in {path} has points outside the domain")
    return points


def save_dataset_csv(path, points: np.ndarray, header: bool = True) -> None:
    points = as_dataset(points)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{i}" for i in range(points.shape[1])])
        for row in points:
            writer.writerow([repr(float(v)) for v in row])
