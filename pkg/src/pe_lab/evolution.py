"""Evolution loops for private synthetic data.

``pe_run`` is the sampling loop: initialize from the random API, then per
iteration generate variations, vote with a nearest-neighbor histogram,
privatize, map the noisy vector back to a probability vector (exact
projection in BL distance, or threshold-and-renormalize, or the Laplace
threshold mechanism), and resample. ``pe_prior_theoretical_run`` is the
older deterministic variant kept for comparison: it thresholds the noisy
histogram and rebuilds the synthetic multiset by nearest-integer rounding
with a multiplicity step.

All reads of the sensitive dataset go through ``SensitiveDataset``, which
counts them; a T-step run performs exactly T histogram reads. Per-iteration
Wasserstein evaluation is diagnostic only and reads the sensitive points
once, before the loop.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .apis import InitSpec, UniformInit, VariationApiSpec, random_api
from .geometry import Domain
from .measures import (
    DiscreteMeasure,
    as_dataset,
    empirical,
    nn_histogram,
    sample_with_replacement,
)
from .privacy import (
    gaussian_perturb,
    gaussian_threshold_renormalize,
    laplace_threshold_histogram,
)
from .transport import bl_norm, bl_project_simplex, w1_exact

__all__ = [
    "SensitiveDataset",
    "BlProjection",
    "ThresholdRenormalize",
    "LaplaceThreshold",
    "PeConfig",
    "IterationRecord",
    "RunTrace",
    "EnvelopeReport",
    "pe_run",
    "pe_prior_theoretical_run",
    "multiplicity_counts",
    "evaluate_gamma_contraction",
    "write_trace_csv",
    "write_trace_aggregate_csv",
]


class SensitiveDataset:
    """Privacy barrier around the sensitive points.

    The evolution loops query the data exclusively through
    ``nn_histogram_against``, so the read counter audits how many times the
    sensitive dataset influenced the output.
    """

    def __init__(self, points):
        self.points = as_dataset(points)
        self.reads = 0

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def nn_histogram_against(self, candidates: np.ndarray) -> np.ndarray:
        self.reads += 1
        return nn_histogram(self.points, candidates)


class ProjectionMode:
    """Marker base for the histogram post-processing step."""


@dataclass(frozen=True)
class BlProjection(ProjectionMode):
    """Exact projection onto the simplex in BL distance; D defaults to the
    domain diameter."""

    D: float | None = None


@dataclass(frozen=True)
class ThresholdRenormalize(ProjectionMode):
    H: float = 0.0

    def __post_init__(self):
        if self.H < 0:
            raise ValueError("threshold must be nonnegative")


@dataclass(frozen=True)
class LaplaceThreshold(ProjectionMode):
    """Laplace noise on positive entries with the standard cutoff; applied
    per iteration at the stated budget (the Gaussian noise step is skipped
    in this mode)."""

    eps: float
    delta: float


@dataclass(frozen=True)
class PeConfig:
    T: int
    n_s: int
    sigma: float
    alpha: float
    domain: Domain
    seed: int
    projection_mode: ProjectionMode = field(default_factory=ThresholdRenormalize)

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.n_s < 1:
            raise ValueError("n_s must be at least 1")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative (0 disables noise)")
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class IterationRecord:
    t: int
    w1: float
    bl_err: float
    degenerate: bool
    wall_time: float


@dataclass
class RunTrace:
    records: list[IterationRecord]
    final_dataset: np.ndarray
    sensitive_reads: int

    @property
    def w1_values(self) -> np.ndarray:
        return np.array([r.w1 for r in self.records])

    @property
    def final_w1(self) -> float:
        return self.records[-1].w1

    @property
    def degenerate_count(self) -> int:
        return sum(1 for r in self.records if r.degenerate)


def _wrap(S) -> SensitiveDataset:
    return S if isinstance(S, SensitiveDataset) else SensitiveDataset(S)


def _w1_to_reference(reference: DiscreteMeasure, synthetic: np.ndarray) -> float:
    synth = empirical(synthetic)
    # Identical empirical measures need no solve; this happens when the
    # run is initialized as an exact copy of the sensitive data.
    if (
        reference.size == synth.size
        and np.array_equal(reference.support, synth.support)
        and np.array_equal(reference.weights, synth.weights)
    ):
        return 0.0
    value, _ = w1_exact(reference, synth.collapse_duplicates())
    return value


def pe_run(
    S,
    cfg: PeConfig,
    api=None,
    init: InitSpec | None = None,
    *,
    compute_w1: bool = True,
    compute_bl_error: bool = False,
) -> RunTrace:
    """Run the sampling evolution loop for cfg.T iterations.

    Deterministic given cfg.seed. The trace has T + 1 records (the t = 0
    entry covers the initial dataset); Wasserstein values are diagnostics
    computed against the sensitive points outside the privacy barrier, and
    can be disabled for speed.
    """
    S = _wrap(S)
    api = api if api is not None else VariationApiSpec(alpha=cfg.alpha, domain=cfg.domain)
    init = init if init is not None else UniformInit()
    rng = np.random.default_rng(cfg.seed)
    reference = empirical(S.points) if compute_w1 else None
    reads_before = S.reads

    records: list[IterationRecord] = []
    t_start = time.perf_counter()
    synthetic = random_api(cfg.domain, cfg.n_s, init, rng)
    w1 = _w1_to_reference(reference, synthetic) if compute_w1 else math.nan
    records.append(IterationRecord(0, w1, math.nan, False, time.perf_counter() - t_start))

    mode = cfg.projection_mode
    for t in range(1, cfg.T + 1):
        t_start = time.perf_counter()
        candidates = api.variations_dataset(synthetic, rng)
        hist = S.nn_histogram_against(candidates)

        bl_err = math.nan
        degenerate = False
        if isinstance(mode, LaplaceThreshold):
            noisy_hist = laplace_threshold_histogram(hist, S.size, mode.eps, mode.delta, rng)
            weights = noisy_hist.weights
            degenerate = noisy_hist.degenerate
        else:
            noisy = gaussian_perturb(hist, cfg.sigma, rng) if cfg.sigma > 0 else hist
            if compute_bl_error:
                D_err = cfg.domain.diameter()
                bl_err = bl_norm(DiscreteMeasure(candidates, hist - noisy), D_err)
            if isinstance(mode, BlProjection):
                D = mode.D if mode.D is not None else cfg.domain.diameter()
                projected, _ = bl_project_simplex(DiscreteMeasure(candidates, noisy), D)
                weights = projected.weights
            elif isinstance(mode, ThresholdRenormalize):
                weights, degenerate = gaussian_threshold_renormalize(noisy, mode.H)
            else:
                raise TypeError(f"unknown projection mode: {type(mode).__name__}")

        if degenerate:
            # Keep-alive policy: all votes were discarded, fall back to the
            # uniform distribution over the current variations.
            weights = np.full(candidates.shape[0], 1.0 / candidates.shape[0])

        synthetic = sample_with_replacement(
            DiscreteMeasure(candidates, weights), cfg.n_s, rng
        )
        w1 = _w1_to_reference(reference, synthetic) if compute_w1 else math.nan
        records.append(
            IterationRecord(t, w1, bl_err, degenerate, time.perf_counter() - t_start)
        )

    return RunTrace(
        records=records,
        final_dataset=synthetic,
        sensitive_reads=S.reads - reads_before,
    )


def pe_prior_theoretical_run(
    S,
    cfg: PeConfig,
    B: int = 1,
    H: float = 0.0,
    api=None,
    init: InitSpec | None = None,
    *,
    compute_w1: bool = True,
) -> RunTrace:
    """Deterministic-multiset evolution variant (kept for comparison).

    Starts from |S| random points (its random API takes the sensitive
    sample size, not n_s), thresholds the noisy histogram at H, and builds
    the next multiset with nearest-integer multiplicity rounding in blocks
    of B. An all-zero rounding leaves the previous synthetic dataset in
    place and flags the iteration degenerate.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    if H < 0:
        raise ValueError("H must be nonnegative")
    S = _wrap(S)
    api = api if api is not None else VariationApiSpec(alpha=cfg.alpha, domain=cfg.domain)
    init = init if init is not None else UniformInit()
    rng = np.random.default_rng(cfg.seed)
    reference = empirical(S.points) if compute_w1 else None
    reads_before = S.reads
    n = S.size

    records: list[IterationRecord] = []
    t_start = time.perf_counter()
    synthetic = random_api(cfg.domain, n, init, rng)
    w1 = _w1_to_reference(reference, synthetic) if compute_w1 else math.nan
    records.append(IterationRecord(0, w1, math.nan, False, time.perf_counter() - t_start))

    for t in range(1, cfg.T + 1):
        t_start = time.perf_counter()
        candidates = api.variations_dataset(synthetic, rng)
        hist = S.nn_histogram_against(candidates)
        noisy = gaussian_perturb(hist, cfg.sigma, rng) if cfg.sigma > 0 else hist
        multiplicity = multiplicity_counts(noisy, n, B, H)
        degenerate = bool(multiplicity.sum() == 0)
        if not degenerate:
            synthetic = np.repeat(candidates, multiplicity, axis=0)
        w1 = _w1_to_reference(reference, synthetic) if compute_w1 else math.nan
        records.append(
            IterationRecord(t, w1, math.nan, degenerate, time.perf_counter() - t_start)
        )

    return RunTrace(
        records=records,
        final_dataset=synthetic,
        sensitive_reads=S.reads - reads_before,
    )


def multiplicity_counts(weights: np.ndarray, n: int, B: int, H: float) -> np.ndarray:
    """Copies of each candidate in the deterministic rebuild: entries below
    H are dropped, the rest contribute nint(n * w / B) * B copies."""
    kept = np.asarray(weights, dtype=np.float64).copy()
    kept[kept < H] = 0.0
    counts = np.rint(n * kept / B).astype(np.int64) * B
    return np.clip(counts, 0, None)


@dataclass(frozen=True)
class EnvelopeReport:
    holds: bool
    max_violation: float
    envelope: np.ndarray


def evaluate_gamma_contraction(trace, gamma: float, err: float, tol: float = 1e-9) -> EnvelopeReport:
    """Check a (possibly averaged) W1 trace against the geometric envelope
    (1-gamma)^t * (G0 - err) + err and report the largest violation."""
    values = trace.w1_values if isinstance(trace, RunTrace) else np.asarray(trace, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 2:
        raise ValueError("need a trace with at least two entries")
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    t = np.arange(values.shape[0])
    envelope = (1.0 - gamma) ** t * (values[0] - err) + err
    violations = values - envelope
    max_violation = float(violations.max())
    return EnvelopeReport(holds=max_violation <= tol, max_violation=max_violation, envelope=envelope)


def write_trace_csv(path, trace: RunTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "w1", "bl_err", "degenerate"])
        for r in trace.records:
            writer.writerow([r.t, repr(r.w1), repr(r.bl_err), int(r.degenerate)])


def write_trace_aggregate_csv(path, traces: list[RunTrace]) -> None:
    """Aggregate several equal-length traces: per-t mean and standard error."""
    if not traces:
        raise ValueError("no traces to aggregate")
    lengths = {len(tr.records) for tr in traces}
    if len(lengths) != 1:
        raise ValueError("traces have unequal lengths")
    values = np.stack([tr.w1_values for tr in traces])
    n_seeds = values.shape[0]
    mean = values.mean(axis=0)
    stderr = (
        values.std(axis=0, ddof=1) / math.sqrt(n_seeds)
        if n_seeds > 1
        else np.zeros_like(mean)
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "mean_w1", "stderr_w1", "n_seeds"])
        for t in range(values.shape[1]):
            writer.writerow([t, repr(float(mean[t])), repr(float(stderr[t])), n_seeds])
