"""Parameter sweeps over coupling strength or isochore time, persisted as CSV.

Grid points run under a bounded thread pool (the BLAS underneath releases
the GIL); results are sorted by (axis_value, mode) before writing so the
output bytes are deterministic for any worker count.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engine import run_engine
from .model import EngineConfig, SpectralDensity

CSV_HEADER = (
    "axis_name", "axis_value", "mode", "W_out", "Q", "eta", "P", "C_h", "C_c",
    "W_hot_adiabat", "W_cold_adiabat", "pop_diff_B", "pop_diff_D",
    "coherence_B", "coherence_D", "n_cycles", "residual",
)

AXES = ("alpha", "tau_i")


@dataclass(frozen=True)
class SweepSpec:
    base: EngineConfig
    axis: str
    grid: tuple
    modes: tuple = ("coherent",)
    output: str = "sweep.csv"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        grid = tuple(sorted(float(v) for v in self.grid))
        if not grid:
            raise ValueError("grid must be nonempty")
        if any(v <= 0 for v in grid):
            raise ValueError("grid values must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid values must be distinct")
        object.__setattr__(self, "grid", grid)
        modes = tuple(self.modes)
        if not modes or any(m not in ("coherent", "incoherent") for m in modes):
            raise ValueError("modes must be a nonempty subset of {coherent, incoherent}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        data = dict(data)
        base = EngineConfig.from_dict(data.pop("base", {}))
        return cls(base=base, **data)


def apply_axis(config: EngineConfig, axis: str, value: float) -> EngineConfig:
    if axis == "alpha":
        sd = SpectralDensity(alpha=value, omega_c=config.spectral_density.omega_c)
        return dataclasses.replace(config, spectral_density=sd)
    if axis == "tau_i":
        return dataclasses.replace(config, tau_i=value)
    raise ValueError(f"unknown axis {axis!r}")


def _run_point(spec: SweepSpec, value: float, mode: str) -> dict:
    config = dataclasses.replace(apply_axis(spec.base, spec.axis, value), mode=mode)
    row = {"axis_name": spec.axis, "axis_value": value, "mode": mode}
    try:
        metrics = run_engine(config)
        for name in CSV_HEADER[3:]:
            row[name] = getattr(metrics, name)
    except Exception as exc:  # record the failure, keep sweeping
        for name in CSV_HEADER[3:]:
            row[name] = float("nan")
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """One row per (grid value, mode), sorted; deterministic for any worker count."""
    jobs = [(v, m) for v in spec.grid for m in spec.modes]
    if workers <= 1:
        rows = [_run_point(spec, v, m) for v, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda vm: _run_point(spec, *vm), jobs))
    rows.sort(key=lambda r: (r["axis_value"], r["mode"]))
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_csv(rows: list, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(CSV_HEADER)]
    for row in rows:
        lines.append(",".join(_fmt(row[name]) for name in CSV_HEADER))
    path.write_text("\n".join(lines) + "\n")


def write_manifest(spec: SweepSpec, rows: list, path) -> None:
    errors = {
        f"{r['axis_value']:.12g}/{r['mode']}": r["error"] for r in rows if "error" in r
    }
    manifest = {
        "tool": "otto-rc",
        "version": __version__,
        "base_config": spec.base.to_dict(),
        "axis": spec.axis,
        "grid": list(spec.grid),
        "modes": list(spec.modes),
        "output": str(spec.output),
        "errors": errors,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_sweep_to_files(spec: SweepSpec, outdir, workers: int = 1) -> tuple:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(spec, workers)
    csv_path = outdir / spec.output
    write_csv(rows, csv_path)
    write_manifest(spec, rows, csv_path.with_suffix(".manifest.json"))
    return rows, csv_path


# --- figure datasets ------------------------------------------------------

FIGURE_IDS = ("fig1a", "fig1b", "fig2", "fig3", "fig4")

# pi*alpha values for the parametric power/efficiency curves
FIG3_PI_ALPHAS = (0.005, 0.01, 0.02)


def default_grids() -> dict:
    return {
        "alpha": tuple(np.geomspace(1e-3, 0.2, 21) / math.pi),
        "tau_i": tuple(np.geomspace(50.0, 6000.0, 21)),
    }


def figure_datasets(
    which: str, base: EngineConfig, outdir, workers: int = 1, grids: dict | None = None
) -> list:
    """Emit the CSV(s) behind one figure panel; returns the written paths."""
    if which not in FIGURE_IDS:
        raise ValueError(f"figure id must be one of {FIGURE_IDS}")
    g = default_grids()
    if grids:
        g.update(grids)
    outdir = Path(outdir)
    paths = []
    if which == "fig1a":
        spec = SweepSpec(base=base, axis="alpha", grid=g["alpha"],
                         modes=("coherent",), output="fig1a.csv")
        _, p = run_sweep_to_files(spec, outdir, workers)
        paths.append(p)
    elif which == "fig1b":
        spec = SweepSpec(base=base, axis="tau_i", grid=g["tau_i"],
                         modes=("coherent",), output="fig1b.csv")
        _, p = run_sweep_to_files(spec, outdir, workers)
        paths.append(p)
    elif which in ("fig2", "fig4"):
        spec = SweepSpec(base=base, axis="tau_i", grid=g["tau_i"],
                         modes=("coherent", "incoherent"), output=f"{which}.csv")
        _, p = run_sweep_to_files(spec, outdir, workers)
        paths.append(p)
    elif which == "fig3":
        for i, pi_alpha in enumerate(FIG3_PI_ALPHAS):
            base_i = apply_axis(base, "alpha", pi_alpha / math.pi)
            spec = SweepSpec(base=base_i, axis="tau_i", grid=g["tau_i"],
                             modes=("coherent", "incoherent"),
                             output=f"fig3_alpha{i}.csv")
            _, p = run_sweep_to_files(spec, outdir, workers)
            paths.append(p)
    return paths
