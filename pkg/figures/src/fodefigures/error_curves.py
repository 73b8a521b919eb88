"""Pointwise-error overlays (log y) from trajectory CSVs with an abs_err column."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .csvio import read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", default="error_curves.png")
    ap.add_argument("--labels", default=None, help="comma list, one per input")
    args = ap.parse_args(argv)
    labels = args.labels.split(",") if args.labels else [str(p) for p in args.inputs]
    fig, ax = new_figure()
    for path, label in zip(args.inputs, labels):
        cols = read_columns(path, ["t", "abs_err"])
        err = np.maximum(cols["abs_err"], 1e-18)
        ax.semilogy(cols["t"], err, lw=0.9, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("pointwise error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
