"""Command-line entry point: scenario runs, parameter and noise calculators."""
from __future__ import annotations

import argparse
import json
import math
import sys

from .experiments import (
    DEFAULT_MASTER_SEED,
    build_scenario,
    list_scenarios,
    parse_scenario_file,
    run_scenario,
)
from .hyperparams import ParameterError, run_params, t_heuristic, theorem2_params
from .privacy import sigma_analytic_gaussian, sigma_for_composition


def _cmd_list(_args) -> int:
    for name, section, description in list_scenarios():
        print(f"{name:16s} [{section}]  {description}")
    return 0


def _parse_sets(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _cmd_run(args) -> int:
    if args.file:
        name, overrides = parse_scenario_file(args.file)
        overrides.update(_parse_sets(args.set))
    elif args.scenario:
        name = args.scenario
        overrides = _parse_sets(args.set)
    else:
        raise SystemExit("provide --scenario NAME or --file FILE")
    if args.seeds is not None:
        overrides["seeds"] = str(args.seeds)
    scenario = build_scenario(name, overrides)
    result = run_scenario(scenario, args.out, progress=not args.quiet)
    n_err = sum(1 for r in result.cell_results if r.error)
    print(f"{scenario.name}: {len(result.cell_results)} cells, {n_err} errors")
    for path in result.files:
        print(f"  wrote {path}")
    return 0 if n_err == 0 else 1


def _cmd_params(args) -> int:
    try:
        params = theorem2_params(args.n, args.eps, args.delta, args.d, args.D)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    items = params.as_dict()
    for key, value in items.items():
        print(f"{key}={value}")
    if args.json:
        print(json.dumps(items, sort_keys=True))
    return 0


def _cmd_calibrate(args) -> int:
    T = args.T if args.T is not None else t_heuristic(args.n, args.eps)
    sensitivity = args.sensitivity if args.sensitivity is not None else math.sqrt(2.0) / args.n
    sigma = sigma_analytic_gaussian(args.eps, args.delta, sensitivity, T)
    closed = sigma_for_composition(T, args.n, args.eps, args.delta)
    print(f"T={T}")
    print(f"per_step_sensitivity={sensitivity}")
    print(f"effective_sensitivity={math.sqrt(T) * sensitivity}")
    print("composition=gaussian_exact_sqrtT")
    print(f"sigma_analytic={sigma}")
    print(f"sigma_closed_form={closed}")
    if args.params:
        rp = run_params(args.n, args.eps, args.delta, args.d, args.D, T=args.T)
        print(f"alpha={rp.alpha}")
        print(f"n_s={rp.n_s}")
        print(f"levels={rp.levels}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pe-lab",
        description="Differentially private synthetic data experiments on convex domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=_cmd_list)

    p_run = sub.add_parser("run", help="run a scenario and write CSV artifacts")
    p_run.add_argument("--scenario", help="built-in scenario name")
    p_run.add_argument("--file", help="plain-text scenario file")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument("--seeds", type=int, default=None, help="seeds per cell")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario parameter (repeatable)")
    p_run.add_argument("--quiet", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_params = sub.add_parser("params", help="closed-form parameter tuple")
    p_params.add_argument("--n", type=int, required=True)
    p_params.add_argument("--eps", type=float, required=True)
    p_params.add_argument("--delta", type=float, required=True)
    p_params.add_argument("--d", type=int, required=True)
    p_params.add_argument("--D", type=float, required=True)
    p_params.add_argument("--json", action="store_true")
    p_params.set_defaults(func=_cmd_params)

    p_cal = sub.add_parser("calibrate", help="noise calibration for T composed releases")
    p_cal.add_argument("--n", type=int, required=True)
    p_cal.add_argument("--eps", type=float, required=True)
    p_cal.add_argument("--delta", type=float, required=True)
    p_cal.add_argument("--T", type=int, default=None)
    p_cal.add_argument("--sensitivity", type=float, default=None)
    p_cal.add_argument("--params", action="store_true",
                       help="also print alpha and n_s at this calibration")
    p_cal.add_argument("--d", type=int, default=2)
    p_cal.add_argument("--D", type=float, default=2.0)
    p_cal.set_defaults(func=_cmd_calibrate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
