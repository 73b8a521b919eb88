"""Shaded stability-region plot from a raster CSV (re_xi, im_xi, stable01)."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .csvio import SchemaError, read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("-o", "--output", default="stability_region.png")
    ap.add_argument("--title", default="")
    args = ap.parse_args(argv)
    cols = read_columns(args.input, ["re_xi", "im_xi", "stable01"])
    re = np.unique(cols["re_xi"])
    im = np.unique(cols["im_xi"])
    if re.size * im.size != cols["stable01"].size:
        raise SchemaError("raster is not a full rectangular grid")
    grid = np.zeros((im.size, re.size))
    ri = np.searchsorted(re, cols["re_xi"])
    ii = np.searchsorted(im, cols["im_xi"])
    grid[ii, ri] = cols["stable01"]
    fig, ax = new_figure()
    ax.imshow(grid, origin="lower", extent=(re[0], re[-1], im[0], im[-1]),
              cmap="Greys", vmin=0.0, vmax=1.6, aspect="auto",
              interpolation="nearest")
    ax.axhline(0.0, color="k", lw=0.4)
    ax.axvline(0.0, color="k", lw=0.4)
    ax.set_xlabel(r"Re $\xi$")
    ax.set_ylabel(r"Im $\xi$")
    if args.title:
        ax.set_title(args.title)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
