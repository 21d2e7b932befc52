"""Figure construction from sweep CSV rows.

Each figure id maps a fixed set of CSV columns onto a fixed set of curves;
styling follows the conventions of the source plots (solid = coherent
engine, dashed = incoherent/dephased engine) and axes are labeled in the
dimensionless units of the dataset (energies in units of the cold-phase
tunneling element eps_c).

Rendering is a pure function of the CSV contents: fixed styles, no
timestamps, and a fixed SVG hash salt, so identical input yields identical
output bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# The sweep CSV schema (interface contract with the simulator package).
CSV_HEADER = (
    "axis_name", "axis_value", "mode", "W_out", "Q", "eta", "P", "C_h", "C_c",
    "W_hot_adiabat", "W_cold_adiabat", "pop_diff_B", "pop_diff_D",
    "coherence_B", "coherence_D", "n_cycles", "residual",
)

FIGURE_IDS = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4")

# figure id -> how many input CSVs it consumes
N_INPUTS = {"fig1a": 1, "fig1b": 1, "fig2a": 1, "fig2b": 1, "fig3": 3, "fig4": 1}

MODE_STYLE = {"coherent": "-", "incoherent": "--"}

X_LABEL = {"alpha": r"$\pi\alpha$", "tau_i": r"$\epsilon_c \tau_i$"}

_RC = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "otto-rc-figures",
}


class SchemaError(ValueError):
    """The CSV does not match the sweep schema."""


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    csv_paths: tuple
    output: str
    style: dict = field(default_factory=dict)  # rcParams overrides

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"figure id must be one of {FIGURE_IDS}")
        paths = tuple(str(p) for p in self.csv_paths)
        object.__setattr__(self, "csv_paths", paths)
        if len(paths) != N_INPUTS[self.figure]:
            raise ValueError(
                f"{self.figure} takes {N_INPUTS[self.figure]} CSV file(s), "
                f"got {len(paths)}"
            )


def load_rows(path) -> list:
    """Read one sweep CSV; exact header match required, numeric columns typed."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"CSV not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file (no header)") from None
        if header != CSV_HEADER:
            for i, (got, want) in enumerate(zip(header, CSV_HEADER)):
                if got != want:
                    raise SchemaError(
                        f"{path}: column {i} is {got!r}, expected {want!r}"
                    )
            raise SchemaError(
                f"{path}: {len(header)} columns, expected {len(CSV_HEADER)}"
            )
        rows = []
        for raw in reader:
            if len(raw) != len(CSV_HEADER):
                raise SchemaError(
                    f"{path}: row {len(rows) + 2} has {len(raw)} fields"
                )
            row = dict(zip(CSV_HEADER, raw))
            for name in CSV_HEADER[3:] + ("axis_value",):
                row[name] = float(row[name])
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _split_modes(rows, path, required=("coherent", "incoherent")):
    out = {}
    for mode in required:
        sel = [r for r in rows if r["mode"] == mode]
        if not sel:
            raise SchemaError(f"{path}: no rows for mode {mode!r}")
        out[mode] = sorted(sel, key=lambda r: r["axis_value"])
    return out


def _xy(rows, ycol, xcol="axis_value"):
    xs = [r[xcol] for r in rows]
    ys = [r[ycol] for r in rows]
    if rows[0]["axis_name"] == "alpha" and xcol == "axis_value":
        xs = [math.pi * x for x in xs]
    return xs, ys


def _x_label(rows):
    return X_LABEL[rows[0]["axis_name"]]


def _build_fig1a(fig, rows):
    (rows,) = rows
    ax = fig.subplots()
    ax2 = ax.twinx()
    ax.plot(*_xy(rows, "P"), "-", color="tab:blue", label=r"$P$")
    ax2.plot(*_xy(rows, "eta"), "--", color="black", label=r"$\eta$")
    ax.set_xscale("log")
    ax.set_xlabel(_x_label(rows))
    ax.set_ylabel(r"$P\ [\epsilon_c^2]$", color="tab:blue")
    ax2.set_ylabel(r"$\eta$", color="black")
    ax2.grid(False)
    fig.legend(loc="upper right", bbox_to_anchor=(0.9, 0.9))


def _build_fig1b(fig, rows):
    (rows,) = rows
    ax = fig.subplots()
    ax2 = ax.twinx()
    ax.plot(*_xy(rows, "W_out"), "--", color="black", label=r"$W_{\rm out}$")
    ax2.plot(*_xy(rows, "P"), "-", color="tab:blue", label=r"$P$")
    ax.set_xscale("log")
    ax.set_xlabel(_x_label(rows))
    ax.set_ylabel(r"$W_{\rm out}\ [\epsilon_c]$", color="black")
    ax2.set_ylabel(r"$P\ [\epsilon_c^2]$", color="tab:blue")
    ax2.grid(False)
    fig.legend(loc="center right", bbox_to_anchor=(0.88, 0.5))


def _build_fig2a(fig, rows, path):
    (rows,) = rows
    modes = _split_modes(rows, path)
    ax = fig.subplots()
    colors = {"W_out": "black", "C_h": "tab:red", "C_c": "tab:blue"}
    labels = {"W_out": r"$W_{\rm out}$", "C_h": r"$C_h$", "C_c": r"$C_c$"}
    for mode, sel in modes.items():
        for col, color in colors.items():
            label = labels[col] if mode == "coherent" else None
            ax.plot(*_xy(sel, col), MODE_STYLE[mode], color=color, label=label)
    ax.set_xscale("log")
    ax.set_xlabel(_x_label(rows))
    ax.set_ylabel(r"energy $[\epsilon_c]$")
    ax.legend(title="dashed = dephased")


def _build_fig2b(fig, rows, path):
    (rows,) = rows
    modes = _split_modes(rows, path)
    ax = fig.subplots()
    for mode, sel in modes.items():
        ax.plot(*_xy(sel, "eta"), MODE_STYLE[mode], color="black",
                label=f"{mode} engine")
    ax.set_xscale("log")
    ax.set_xlabel(_x_label(rows))
    ax.set_ylabel(r"$\eta$")
    ax.legend()


def _build_fig3(fig, row_sets, paths):
    ax = fig.subplots()
    colors = ("tab:blue", "black", "tab:red")
    for rows, path, color in zip(row_sets, paths, colors):
        modes = _split_modes(rows, path)
        for mode, sel in modes.items():
            label = Path(path).stem if mode == "coherent" else None
            _, etas = _xy(sel, "eta")
            _, Ps = _xy(sel, "P")
            ax.plot(etas, Ps, MODE_STYLE[mode], color=color, marker=".",
                    label=label)
    ax.set_xlabel(r"$\eta$")
    ax.set_ylabel(r"$P\ [\epsilon_c^2]$")
    ax.legend(title="dashed = dephased")


def _build_fig4(fig, rows, path):
    (rows,) = rows
    modes = _split_modes(rows, path)
    ax_pop, ax_w = fig.subplots(2, 1, sharex=True)
    pop_style = {"pop_diff_B": "tab:red", "pop_diff_D": "tab:blue"}
    w_style = {"W_hot_adiabat": "tab:red", "W_cold_adiabat": "tab:blue"}
    labels = {
        "pop_diff_B": r"$\langle\sigma_z\rangle_B$",
        "pop_diff_D": r"$\langle\sigma_z\rangle_D$",
        "W_hot_adiabat": r"$W_{\rm hot}$",
        "W_cold_adiabat": r"$W_{\rm cold}$",
    }
    for mode, sel in modes.items():
        for col, color in pop_style.items():
            label = labels[col] if mode == "coherent" else None
            ax_pop.plot(*_xy(sel, col), MODE_STYLE[mode], color=color, label=label)
        for col, color in w_style.items():
            label = labels[col] if mode == "coherent" else None
            ax_w.plot(*_xy(sel, col), MODE_STYLE[mode], color=color, label=label)
    ax_pop.set_ylabel("population difference")
    ax_w.set_ylabel(r"stroke work $[\epsilon_c]$")
    ax_w.set_xlabel(_x_label(rows))
    ax_w.set_xscale("log")
    ax_pop.legend(title="dashed = dephased")
    ax_w.legend()


def build_figure(spec: FigureSpec):
    """Load the CSVs and return the assembled matplotlib Figure."""
    row_sets = [load_rows(p) for p in spec.csv_paths]
    with plt.rc_context({**_RC, **spec.style}):
        fig = plt.figure(figsize=(5.0, 3.4 if spec.figure != "fig4" else 5.2))
        if spec.figure == "fig1a":
            _build_fig1a(fig, row_sets)
        elif spec.figure == "fig1b":
            _build_fig1b(fig, row_sets)
        elif spec.figure == "fig2a":
            _build_fig2a(fig, row_sets, spec.csv_paths[0])
        elif spec.figure == "fig2b":
            _build_fig2b(fig, row_sets, spec.csv_paths[0])
        elif spec.figure == "fig3":
            _build_fig3(fig, row_sets, spec.csv_paths)
        elif spec.figure == "fig4":
            _build_fig4(fig, row_sets, spec.csv_paths[0])
        fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.output (format from the extension)."""
    fig = build_figure(spec)  # raises before any file is touched
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = out.suffix.lstrip(".").lower() or "png"
    # strip the date metadata the SVG backend would otherwise embed
    metadata = {"Date": None} if fmt == "svg" else None
    with plt.rc_context({**_RC, **spec.style}):
        fig.savefig(out, format=fmt, metadata=metadata)
    plt.close(fig)
    return out
