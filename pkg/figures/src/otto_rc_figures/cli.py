"""One command per figure id, reading the sweep CSVs emitted by the simulator.

    otto-rc-figures fig1a --data-dir data/ --out figs/fig1a.png

Default input file names match the simulator's export-figures outputs
(fig2a and fig2b both read fig2.csv; fig3 reads fig3_alpha{0,1,2}.csv).
Exit codes: 0 success, 1 bad input (missing file, schema mismatch).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_IDS, N_INPUTS, FigureSpec, SchemaError, render

DEFAULT_INPUTS = {
    "fig1a": ("fig1a.csv",),
    "fig1b": ("fig1b.csv",),
    "fig2a": ("fig2.csv",),
    "fig2b": ("fig2.csv",),
    "fig3": ("fig3_alpha0.csv", "fig3_alpha1.csv", "fig3_alpha2.csv"),
    "fig4": ("fig4.csv",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otto-rc-figures",
        description="Render figures from otto-rc sweep CSV datasets",
    )
    sub = parser.add_subparsers(dest="figure", required=True)
    for fid in FIGURE_IDS:
        p = sub.add_parser(fid, help=f"render {fid} from {'/'.join(DEFAULT_INPUTS[fid])}")
        p.add_argument("--csv", nargs=N_INPUTS[fid],
                       help="input CSV path(s); defaults resolved in --data-dir")
        p.add_argument("--data-dir", default=".",
                       help="directory holding the default-named CSVs")
        p.add_argument("--out", help=f"output image path (default: {fid}.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    csvs = args.csv or [str(Path(args.data_dir) / n) for n in DEFAULT_INPUTS[args.figure]]
    spec = FigureSpec(
        figure=args.figure,
        csv_paths=tuple(csvs),
        output=args.out or f"{args.figure}.png",
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 1
    sys.stderr.write(f"wrote {out}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
