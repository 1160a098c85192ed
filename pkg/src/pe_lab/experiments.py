"""Seeded scenario runner: parameter sweeps over evolution runs as CSVs.

Seven built-in scenarios cover the simulation studies this package is
meant to reproduce: error versus step count and versus synthetic sample
count, the effect of initialization, dimension and budget sweeps, the
clustered-data comparison between the Laplace-threshold and Gaussian
histograms, and a one-shot signed-measure mechanism versus the evolution
loop.

Determinism: a scenario master seed is split into per-cell seeds through
``SeedSequence([master, series_index, value_index, seed_index])``; each
cell draws its own sensitive dataset and algorithm seed from that split,
and the derived 64-bit algorithm seed is recorded in the per-seed CSV for
replay. Cells run in sorted order, so re-running a scenario writes
byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .apis import CopyInit, InitSpec, InterpolateInit, PointMassInit, UniformInit
from .evolution import (
    BlProjection,
    LaplaceThreshold,
    PeConfig,
    ProjectionMode,
    RunTrace,
    ThresholdRenormalize,
    pe_run,
    write_trace_aggregate_csv,
    write_trace_csv,
)
from .geometry import Ball, Domain
from .hyperparams import RunParams, run_params, t_heuristic
from .measures import empirical, load_dataset_csv
from .psmm import grid_partition, psmm_run
from .transport import w1_exact

__all__ = [
    "Scenario",
    "RunCell",
    "CellResult",
    "SweepResult",
    "list_scenarios",
    "build_scenario",
    "run_scenario",
    "parse_scenario_file",
    "DEFAULT_MASTER_SEED",
]

DEFAULT_MASTER_SEED = 20_240_613


@dataclass(frozen=True)
class RunCell:
    """One (series, sweep value, seed) unit of work."""

    series: str
    series_index: int
    sweep_value: float
    value_index: int
    seed_index: int
    kind: str  # "pe" or "psmm"
    n: int
    eps: float
    delta: float
    d: int
    params: RunParams
    projection: ProjectionMode
    init_kind: str  # "uniform" | "copy" | "pointmass" | "interpolate:<beta>"
    data_kind: str  # "quadrant" | "ball:<radius>" | "file:<path>"
    m_grid: int = 0
    keep_trace: bool = False


@dataclass
class CellResult:
    cell: RunCell
    algo_seed: int
    final_w1: float = math.nan
    degenerate_iters: int = 0
    error: str = ""
    trace: RunTrace | None = None


@dataclass
class SweepResult:
    scenario: str
    rows: list[dict]
    cell_results: list[CellResult]
    files: list[Path]


@dataclass(frozen=True)
class Scenario:
    name: str
    section: str
    description: str
    cells: tuple[RunCell, ...]
    sweep_param: str
    master_seed: int
    markers: dict = field(default_factory=dict)  # series -> {predicted_T, predicted_ns}
    traces: bool = False


def _scenario_catalog() -> dict:
    return {
        "fig2_T_sweep": (
            "fig2-top",
            "Final error of the last iterate versus the number of evolution "
            "steps, for several sensitive sample sizes; the predicted step "
            "count marks ceil(2 ln(n*eps)).",
            _build_fig2_T_sweep,
        ),
        "fig2_ns_sweep": (
            "fig2-bottom",
            "Final error versus the number of synthetic samples, swept on a "
            "geometric grid around the predicted value.",
            _build_fig2_ns_sweep,
        ),
        "fig5_init": (
            "fig5",
            "Per-iteration error traces under different initializations: an "
            "exact copy of the sensitive data, a point mass at the origin, "
            "and a contraction of the data toward the center.",
            _build_fig5_init,
        ),
        "appB_d_sweep": (
            "appB-left",
            "Final error as the ambient dimension grows, all other "
            "parameters from the standard calibration.",
            _build_appB_d_sweep,
        ),
        "appB_eps_sweep": (
            "appB-right",
            "Final error as the privacy budget grows, in two dimensions.",
            _build_appB_eps_sweep,
        ),
        "appF_clustered": (
            "appF",
            "Laplace-threshold versus all-entries Gaussian histograms on "
            "heavily clustered and spread-out sensitive data.",
            _build_appF_clustered,
        ),
        "psmm_vs_pe": (
            "psmm",
            "One-shot signed-measure mechanism on a grid partition versus "
            "the evolution loop at a matched budget.",
            _build_psmm_vs_pe,
        ),
    }


def list_scenarios() -> list[tuple[str, str, str]]:
    """Names, section tags, and descriptions of the built-in scenarios."""
    return [(name, sec, desc) for name, (sec, desc, _) in _scenario_catalog().items()]


def build_scenario(name: str, overrides: dict | None = None) -> Scenario:
    catalog = _scenario_catalog()
    if name not in catalog:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(catalog)}")
    section, description, builder = catalog[name]
    ov = dict(overrides or {})
    master_seed = int(ov.pop("master_seed", DEFAULT_MASTER_SEED))
    cells, sweep_param, markers, traces = builder(ov)
    if ov:
        raise ValueError(f"unused overrides for {name}: {sorted(ov)}")
    return Scenario(
        name=name,
        section=section,
        description=description,
        cells=tuple(cells),
        sweep_param=sweep_param,
        master_seed=master_seed,
        markers=markers,
        traces=traces,
    )


# ---------------------------------------------------------------------------
# Builders. Each consumes the overrides it understands and returns
# (cells, sweep_param, markers, traces).
# ---------------------------------------------------------------------------

def _int_list(value, default):
    if value is None:
        return list(default)
    if isinstance(value, str):
        return [int(v) for v in value.split(",") if v]
    return [int(v) for v in np.atleast_1d(value)]


def _float_list(value, default):
    if value is None:
        return list(default)
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v]
    return [float(v) for v in np.atleast_1d(value)]


def _str_list(value, default):
    if value is None:
        return list(default)
    if isinstance(value, str):
        return [s for s in value.split(",") if s]
    return list(value)


def _mode_from_override(name: str, eps: float, delta: float, H: float) -> ProjectionMode:
    if name == "threshold":
        return ThresholdRenormalize(H)
    if name == "bl":
        return BlProjection()
    if name == "laplace":
        return LaplaceThreshold(eps, delta)
    raise ValueError(f"unknown projection mode {name!r}")


def _pe_cells(
    *,
    series: str,
    series_index: int,
    sweep_values,
    value_params,
    n: int,
    eps: float,
    delta: float,
    d: int,
    n_seeds: int,
    projection: ProjectionMode,
    init_kind: str = "uniform",
    data_kind: str = "quadrant",
    keep_trace: bool = False,
) -> list[RunCell]:
    cells = []
    for vi, value in enumerate(sweep_values):
        params = value_params(value)
        for si in range(n_seeds):
            cells.append(
                RunCell(
                    series=series,
                    series_index=series_index,
                    sweep_value=float(value),
                    value_index=vi,
                    seed_index=si,
                    kind="pe",
                    n=n,
                    eps=eps,
                    delta=delta,
                    d=d,
                    params=params,
                    projection=projection,
                    init_kind=init_kind,
                    data_kind=data_kind,
                    keep_trace=keep_trace,
                )
            )
    return cells


def _build_fig2_T_sweep(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n_list = _int_list(ov.pop("n_list", None), (250, 1000, 4000))
    t_values = _int_list(ov.pop("T_values", None), range(1, 25))
    n_seeds = int(ov.pop("seeds", 100))
    H = float(ov.pop("H", 0.0))
    cells: list[RunCell] = []
    markers = {}
    for gi, n in enumerate(n_list):
        series = f"n={n}"
        markers[series] = {"predicted_T": t_heuristic(n, eps)}
        cells += _pe_cells(
            series=series,
            series_index=gi,
            sweep_values=t_values,
            value_params=lambda T, n=n: run_params(n, eps, delta, 2, 2.0, T=int(T)),
            n=n,
            eps=eps,
            delta=delta,
            d=2,
            n_seeds=n_seeds,
            projection=ThresholdRenormalize(H),
        )
    return cells, "T", markers, False


def _build_fig2_ns_sweep(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n_list = _int_list(ov.pop("n_list", None), (250, 1000, 4000))
    factors = _float_list(ov.pop("factors", None), (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0))
    n_seeds = int(ov.pop("seeds", 100))
    H = float(ov.pop("H", 0.0))
    cells: list[RunCell] = []
    markers = {}
    for gi, n in enumerate(n_list):
        series = f"n={n}"
        base = run_params(n, eps, delta, 2, 2.0)
        markers[series] = {"predicted_ns": base.n_s, "predicted_T": base.T}
        ns_values = sorted({max(1, math.ceil(c * base.n_s)) for c in factors})

        def with_ns(ns, base=base):
            return RunParams(
                T=base.T,
                sigma=base.sigma,
                alpha=base.alpha,
                n_s=int(ns),
                levels=base.levels,
                calibration=base.calibration,
                sensitivity=base.sensitivity,
            )

        cells += _pe_cells(
            series=series,
            series_index=gi,
            sweep_values=ns_values,
            value_params=with_ns,
            n=n,
            eps=eps,
            delta=delta,
            d=2,
            n_seeds=n_seeds,
            projection=ThresholdRenormalize(H),
        )
    return cells, "n_s", markers, False


def _build_fig5_init(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n = int(ov.pop("n", 1000))
    n_seeds = int(ov.pop("seeds", 100))
    T = ov.pop("T", None)
    T = int(T) if T is not None else None
    beta = float(ov.pop("beta", 0.25))
    inits = _str_list(ov.pop("inits", None), ("copy_of_s", "point_mass_origin", f"interpolate_{beta}"))
    H = float(ov.pop("H", 0.0))
    params = run_params(n, eps, delta, 2, 2.0, T=T)
    cells: list[RunCell] = []
    for gi, init_name in enumerate(inits):
        if init_name == "copy_of_s":
            init_kind = "copy"
        elif init_name == "point_mass_origin":
            init_kind = "pointmass"
        elif init_name.startswith("interpolate_"):
            init_kind = f"interpolate:{init_name.split('_', 1)[1]}"
        else:
            raise ValueError(f"unknown init {init_name!r}")
        cells += _pe_cells(
            series=init_name,
            series_index=gi,
            sweep_values=[0.0],
            value_params=lambda _v, p=params: p,
            n=n,
            eps=eps,
            delta=delta,
            d=2,
            n_seeds=n_seeds,
            projection=ThresholdRenormalize(H),
            init_kind=init_kind,
            keep_trace=True,
        )
    markers = {init_name: {"predicted_T": params.T} for init_name in inits}
    return cells, "init", markers, True


def _build_appB_d_sweep(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n = int(ov.pop("n", 1000))
    d_values = _int_list(ov.pop("d_values", None), range(1, 11))
    n_seeds = int(ov.pop("seeds", 100))
    H = float(ov.pop("H", 0.0))
    cells: list[RunCell] = []
    for vi, d in enumerate(d_values):
        params = run_params(n, eps, delta, d, 2.0)
        for si in range(n_seeds):
            cells.append(
                RunCell(
                    series="pe",
                    series_index=0,
                    sweep_value=float(d),
                    value_index=vi,
                    seed_index=si,
                    kind="pe",
                    n=n,
                    eps=eps,
                    delta=delta,
                    d=d,
                    params=params,
                    projection=ThresholdRenormalize(H),
                    init_kind="uniform",
                    data_kind="quadrant",
                )
            )
    return cells, "d", {}, False


def _build_appB_eps_sweep(ov: dict):
    delta = float(ov.pop("delta", 1e-4))
    n = int(ov.pop("n", 1000))
    eps_values = _float_list(ov.pop("eps_values", None), np.round(np.arange(0.1, 1.01, 0.1), 2))
    n_seeds = int(ov.pop("seeds", 100))
    H = float(ov.pop("H", 0.0))
    cells: list[RunCell] = []
    for vi, eps in enumerate(eps_values):
        params = run_params(n, eps, delta, 2, 2.0)
        for si in range(n_seeds):
            cells.append(
                RunCell(
                    series="pe",
                    series_index=0,
                    sweep_value=float(eps),
                    value_index=vi,
                    seed_index=si,
                    kind="pe",
                    n=n,
                    eps=eps,
                    delta=delta,
                    d=2,
                    params=params,
                    projection=ThresholdRenormalize(H),
                    init_kind="uniform",
                    data_kind="quadrant",
                )
            )
    return cells, "eps", {}, False


def _build_appF_clustered(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n = int(ov.pop("n", 1000))
    radii = _float_list(ov.pop("radii", None), (0.02, 0.5))
    n_seeds = int(ov.pop("seeds", 100))
    T = ov.pop("T", None)
    T = int(T) if T is not None else None
    params = run_params(n, eps, delta, 2, 2.0, T=T)
    modes = {
        "laplace_threshold": LaplaceThreshold(eps, delta),
        "gaussian_all": ThresholdRenormalize(0.0),
    }
    cells: list[RunCell] = []
    for gi, (mode_name, mode) in enumerate(modes.items()):
        for vi, radius in enumerate(radii):
            for si in range(n_seeds):
                cells.append(
                    RunCell(
                        series=mode_name,
                        series_index=gi,
                        sweep_value=float(radius),
                        value_index=vi,
                        seed_index=si,
                        kind="pe",
                        n=n,
                        eps=eps,
                        delta=delta,
                        d=2,
                        params=params,
                        projection=mode,
                        init_kind="uniform",
                        data_kind=f"ball:{radius}",
                    )
                )
    return cells, "data_radius", {}, False


def _build_psmm_vs_pe(ov: dict):
    eps = float(ov.pop("eps", 1.0))
    delta = float(ov.pop("delta", 1e-4))
    n = int(ov.pop("n", 4000))
    m_grid = int(ov.pop("m_grid", 400))
    n_seeds = int(ov.pop("seeds", 50))
    H = float(ov.pop("H", 0.0))
    params = run_params(n, eps, delta, 2, 2.0)
    cells: list[RunCell] = []
    for si in range(n_seeds):
        cells.append(
            RunCell(
                series="psmm",
                series_index=0,
                sweep_value=float(n),
                value_index=0,
                seed_index=si,
                kind="psmm",
                n=n,
                eps=eps,
                delta=delta,
                d=2,
                params=params,
                projection=ThresholdRenormalize(H),
                init_kind="uniform",
                data_kind="quadrant",
                m_grid=m_grid,
            )
        )
    for si in range(n_seeds):
        cells.append(
            RunCell(
                series="pe",
                series_index=1,
                sweep_value=float(n),
                value_index=0,
                seed_index=si,
                kind="pe",
                n=n,
                eps=eps,
                delta=delta,
                d=2,
                params=params,
                projection=ThresholdRenormalize(H),
                init_kind="uniform",
                data_kind="quadrant",
            )
        )
    return cells, "n", {}, False


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _sensitive_data(cell: RunCell, rng: np.random.Generator, domain: Domain) -> np.ndarray:
    kind = cell.data_kind
    if kind == "quadrant":
        # Componentwise absolute value maps the uniform ball onto the
        # uniform positive-orthant ball exactly.
        return np.abs(domain.sample_uniform(cell.n, rng))
    if kind.startswith("ball:"):
        radius = float(kind.split(":", 1)[1])
        inner = Ball(np.zeros(cell.d), radius)
        return inner.sample_uniform(cell.n, rng)
    if kind.startswith("file:"):
        return load_dataset_csv(kind.split(":", 1)[1], domain=domain)
    raise ValueError(f"unknown data kind {kind!r}")


def _init_spec(cell: RunCell, data: np.ndarray) -> InitSpec:
    kind = cell.init_kind
    if kind == "uniform":
        return UniformInit()
    if kind == "pointmass":
        return PointMassInit(np.zeros(cell.d))
    if kind == "copy":
        return CopyInit(data)
    if kind.startswith("interpolate:"):
        return InterpolateInit(float(kind.split(":", 1)[1]), data)
    raise ValueError(f"unknown init kind {kind!r}")


def _execute_cell(cell: RunCell, master_seed: int) -> CellResult:
    ss = np.random.SeedSequence(
        [master_seed, cell.series_index, cell.value_index, cell.seed_index]
    )
    algo_seed = int(ss.generate_state(1, np.uint64)[0])
    result = CellResult(cell=cell, algo_seed=algo_seed)
    try:
        domain = Ball(np.zeros(cell.d), 1.0)
        # One sensitive dataset per (generator, d, n): sweeps and seeds vary
        # algorithm randomness only, matching the expectation the means
        # estimate, and paired comparisons across series share their data.
        data_ss = np.random.SeedSequence(
            [master_seed, zlib.crc32(cell.data_kind.encode()), cell.d, cell.n]
        )
        data = _sensitive_data(cell, np.random.default_rng(data_ss), domain)
        if cell.kind == "pe":
            cfg = PeConfig(
                T=cell.params.T,
                n_s=cell.params.n_s,
                sigma=cell.params.sigma,
                alpha=cell.params.alpha,
                domain=domain,
                seed=algo_seed,
                projection_mode=cell.projection,
            )
            trace = pe_run(
                data,
                cfg,
                init=_init_spec(cell, data),
                compute_w1=cell.keep_trace,
            )
            if cell.keep_trace:
                result.final_w1 = trace.final_w1
            else:
                value, _ = w1_exact(
                    empirical(data), empirical(trace.final_dataset).collapse_duplicates()
                )
                result.final_w1 = value
            result.degenerate_iters = trace.degenerate_count
            result.trace = trace if cell.keep_trace else None
        elif cell.kind == "psmm":
            partition = grid_partition(domain, cell.m_grid)
            rng = np.random.default_rng(algo_seed)
            synthetic = psmm_run(data, partition, cell.params.n_s, cell.eps, cell.delta, rng)
            value, _ = w1_exact(
                empirical(data), empirical(synthetic).collapse_duplicates()
            )
            result.final_w1 = value
        else:
            raise ValueError(f"unknown cell kind {cell.kind!r}")
    except Exception as exc:  # recorded, scenario continues
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def run_scenario(
    scenario: Scenario,
    out_dir,
    progress: bool = False,
) -> SweepResult:
    """Execute every cell, write per-seed and aggregate CSVs, return rows."""
    out = Path(out_dir) / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []

    cells = sorted(
        scenario.cells, key=lambda c: (c.series_index, c.value_index, c.seed_index)
    )
    results: list[CellResult] = []
    for i, cell in enumerate(cells):
        results.append(_execute_cell(cell, scenario.master_seed))
        if progress and (i + 1) % 50 == 0:
            print(f"[{scenario.name}] {i + 1}/{len(cells)} cells", flush=True)

    seeds_path = out / "seeds.csv"
    with open(seeds_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scenario", "series", "sweep_param", "sweep_value", "seed_index",
             "algo_seed", "final_w1", "degenerate_iters", "error"]
        )
        for r in results:
            writer.writerow(
                [scenario.name, r.cell.series, scenario.sweep_param,
                 repr(r.cell.sweep_value), r.cell.seed_index, r.algo_seed,
                 repr(r.final_w1), r.degenerate_iters, r.error]
            )
    files.append(seeds_path)

    # Aggregate by (series, sweep_value).
    rows: list[dict] = []
    by_key: dict[tuple, list[CellResult]] = {}
    for r in results:
        by_key.setdefault((r.cell.series_index, r.cell.series, r.cell.value_index,
                           r.cell.sweep_value), []).append(r)
    for (series_index, series, value_index, value), group in sorted(by_key.items()):
        finals = np.array([g.final_w1 for g in group if not g.error])
        n_ok = finals.shape[0]
        mean = float(finals.mean()) if n_ok else math.nan
        stderr = (
            float(finals.std(ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
        )
        marker = scenario.markers.get(series, {})
        rows.append(
            {
                "scenario": scenario.name,
                "series": series,
                "sweep_param": scenario.sweep_param,
                "sweep_value": value,
                "n_seeds": n_ok,
                "n_errors": len(group) - n_ok,
                "mean_final_w1": mean,
                "stderr_final_w1": stderr,
                "predicted_T": marker.get("predicted_T", ""),
                "predicted_ns": marker.get("predicted_ns", ""),
            }
        )

    agg_path = out / "sweep_aggregate.csv"
    with open(agg_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            formatted = dict(row)
            for key in ("sweep_value", "mean_final_w1", "stderr_final_w1"):
                formatted[key] = repr(float(row[key]))
            writer.writerow(formatted)
    files.append(agg_path)

    if scenario.traces:
        by_series: dict[tuple, list[CellResult]] = {}
        for r in results:
            if r.trace is not None and not r.error:
                by_series.setdefault((r.cell.series_index, r.cell.series), []).append(r)
        for (_, series), group in sorted(by_series.items()):
            for r in group:
                p = out / f"trace_{series}_seed{r.cell.seed_index}.csv"
                write_trace_csv(p, r.trace)
                files.append(p)
            p = out / f"trace_aggregate_{series}.csv"
            write_trace_aggregate_csv(p, [r.trace for r in group])
            files.append(p)

    meta = {
        "scenario": scenario.name,
        "section": scenario.section,
        "description": scenario.description,
        "master_seed": scenario.master_seed,
        "sweep_param": scenario.sweep_param,
        "n_cells": len(cells),
        "markers": scenario.markers,
        "seed_scheme": "SeedSequence([master, series_index, value_index, seed_index])"
                       " -> spawn(2) = (data, algorithm)",
        "calibration": sorted({c.params.calibration for c in cells}),
    }
    meta_path = out / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    files.append(meta_path)

    return SweepResult(scenario=scenario.name, rows=rows, cell_results=results, files=files)


def parse_scenario_file(path) -> tuple[str, dict]:
    """Plain-text scenario files: ``key = value`` lines, ``#`` comments,
    arrays as comma-separated values. The ``scenario`` key names a built-in;
    every other key is an override."""
    name = None
    overrides: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "scenario":
            name = value
        else:
            overrides[key] = value
    if name is None:
        raise ValueError(f"{path}: missing 'scenario = <name>' line")
    return name, overrides
