"""Command-line entry: spfem-figs plot <kind> --in <csv>... --out <path>."""

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import FigureError
from .plots import plot_conservation, plot_convergence, plot_heatmap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spfem-figs",
        description="Render PNG figures from spfem CSV artifacts.",
    )
    parser.add_argument("--version", action="version", version=f"spfem-figs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render one figure kind from CSV input(s)")
    p.add_argument(
        "kind",
        choices=["conservation", "heatmap", "convergence"],
        help="conservation: drift traces (1-2 diagnostics CSVs); "
        "heatmap: |u| field (snapshot CSVs, batched); "
        "convergence: log-log orders (1 convergence CSV)",
    )
    p.add_argument(
        "--in",
        dest="inputs",
        action="append",
        required=True,
        metavar="CSV",
        help="input file (repeatable where the kind allows it)",
    )
    p.add_argument(
        "--out",
        required=True,
        metavar="PATH",
        help="output PNG, or an output directory for a heatmap batch",
    )
    p.add_argument(
        "--label",
        dest="labels",
        action="append",
        metavar="NAME",
        help="legend label per input (conservation only, repeatable)",
    )
    return parser


def run_plot(kind, inputs, out, labels=None) -> list[Path]:
    out = Path(out)
    if kind == "conservation":
        return [plot_conservation(inputs, out, labels=labels)]
    if labels:
        raise FigureError(f"--label only applies to conservation plots, not {kind}")
    if kind == "convergence":
        if len(inputs) != 1:
            raise FigureError(f"convergence plot takes exactly 1 input, got {len(inputs)}")
        return [plot_convergence(inputs[0], out)]
    # heatmap: one file per input; a multi-input batch lands in a directory
    if len(inputs) == 1 and not out.is_dir():
        return [plot_heatmap(inputs[0], out)]
    out.mkdir(parents=True, exist_ok=True)
    return [plot_heatmap(p, out / (Path(p).stem + ".png")) for p in inputs]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = run_plot(args.kind, args.inputs, args.out, labels=args.labels)
    except FigureError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0
