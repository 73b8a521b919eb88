"""Fast-convolution relative-error curves from a check CSV (contour, n, rel_err)."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .csvio import read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("-o", "--output", default="fastconv_error.png")
    args = ap.parse_args(argv)
    cols = read_columns(args.input, ["contour", "n", "rel_err"])
    fig, ax = new_figure()
    contours = cols["contour"].astype(str)
    for name in sorted(set(contours)):
        mask = contours == name
        n = cols["n"][mask]
        err = np.maximum(cols["rel_err"][mask], 1e-18)
        order = np.argsort(n)
        ax.semilogy(n[order], err[order], lw=0.9, label=name)
    ax.set_xlabel("n")
    ax.set_ylabel("relative error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
