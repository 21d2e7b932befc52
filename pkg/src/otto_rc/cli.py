"""Command-line surface: simulate one cycle, sweep a grid, run the oracle
suites, or export the figure datasets.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 oracle failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

from . import oracle, sweep
from .engine import ConvergenceError, run_engine
from .model import EngineConfig
from .propagate import PropagationError

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ORACLE = 3


class ConfigError(ValueError):
    pass


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from exc


def _parse_value(text: str):
    if text == "inf":
        return "inf"
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_overrides(data: dict, sets: list) -> dict:
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot descend into {part!r} of override {key!r}")
        node[parts[-1]] = _parse_value(raw.strip())
    return data


def _resolve_config(args) -> EngineConfig:
    data = _load_json(args.config) if args.config else {}
    if getattr(args, "mode", None):
        data["mode"] = args.mode
    data = _apply_overrides(data, args.set or [])
    try:
        return EngineConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    env = os.environ.get("OTTO_RC_WORKERS")
    return int(env) if env else 1


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    metrics = run_engine(config)
    _emit({"config": config.to_dict(), "metrics": metrics.to_dict()}, args.out)
    return 0


def cmd_sweep(args) -> int:
    data = _load_json(args.spec)
    data = _apply_overrides(data, args.set or [])
    try:
        spec = sweep.SweepSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    rows, csv_path = sweep.run_sweep_to_files(spec, args.out or ".", _workers(args))
    failures = [r for r in rows if "error" in r]
    sys.stderr.write(f"wrote {csv_path} ({len(rows)} rows, {len(failures)} failed)\n")
    if failures and args.strict:
        return EXIT_NUMERICAL
    return 0


def cmd_oracle(args) -> int:
    report = oracle.run_report(dim_cap=args.dim_cap)
    for suite in report["suites"]:
        line = {k: v for k, v in suite.items() if k != "name"}
        print(f"{suite['name']}: {json.dumps(line, sort_keys=True)}")
    print(f"overall: {report['status']}")
    return 0 if report["status"] == "pass" else EXIT_ORACLE


def cmd_export_figures(args) -> int:
    config = _resolve_config(args)
    if not args.config and not any("reset_policy" in s for s in (args.set or [])):
        # desk-scale default: the projective reset runs the isochores on the
        # small coupled subspace, which keeps full figure grids interactive
        config = dataclasses.replace(config, reset_policy="projective")
    grids = {}
    if args.grid_points:
        import numpy as np

        base = sweep.default_grids()
        grids = {
            "alpha": tuple(
                np.geomspace(base["alpha"][0], base["alpha"][-1], args.grid_points)
            ),
            "tau_i": tuple(
                np.geomspace(base["tau_i"][0], base["tau_i"][-1], args.grid_points)
            ),
        }
    for which in args.figures:
        paths = sweep.figure_datasets(
            which, config, args.out or ".", _workers(args), grids or None
        )
        for p in paths:
            sys.stderr.write(f"wrote {p}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otto-rc",
        description="Finite-time strong-coupling quantum Otto engine simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one engine to its limit cycle")
    sim.add_argument("--config", help="JSON config file (defaults used when omitted)")
    sim.add_argument("--mode", choices=("coherent", "incoherent"))
    sim.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="dotted-key config override, repeatable")
    sim.add_argument("--out", help="write the metrics JSON here instead of stdout")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="run a parameter sweep from a sweep spec")
    sw.add_argument("--spec", required=True, help="JSON sweep spec (base/axis/grid/modes)")
    sw.add_argument("--set", action="append", metavar="KEY=VALUE")
    sw.add_argument("--out", help="output directory (default: current)")
    sw.add_argument("--workers", type=int)
    sw.add_argument("--strict", action="store_true",
                    help="exit nonzero if any grid point fails")
    sw.set_defaults(func=cmd_sweep)

    orc = sub.add_parser("oracle", help="run the small-instance equivalence suites")
    orc.add_argument("--dim-cap", type=int, default=32,
                     help="largest Hilbert-space dimension used by the suites")
    orc.set_defaults(func=cmd_oracle)

    exp = sub.add_parser("export-figures", help="emit the CSV datasets behind the figures")
    exp.add_argument("figures", nargs="+", choices=sweep.FIGURE_IDS)
    exp.add_argument("--config", help="JSON base config")
    exp.add_argument("--set", action="append", metavar="KEY=VALUE")
    exp.add_argument("--grid-points", type=int, help="override the per-axis grid size")
    exp.add_argument("--out", help="output directory")
    exp.add_argument("--workers", type=int)
    exp.set_defaults(func=cmd_export_figures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (PropagationError, ConvergenceError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
