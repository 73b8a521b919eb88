"""Field snapshots u and v as heatmaps from a fields CSV (x, y, u, v)."""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, read_columns
from .render import run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("-o", "--output", default="fields.png")
    args = ap.parse_args(argv)
    cols = read_columns(args.input, ["x", "y", "u", "v"])
    xs = np.unique(cols["x"])
    ys = np.unique(cols["y"])
    if xs.size * ys.size != cols["u"].size:
        raise SchemaError("field data is not a full rectangular grid")
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, name in zip(axes, ("u", "v")):
        grid = np.zeros((ys.size, xs.size))
        xi = np.searchsorted(xs, cols["x"])
        yi = np.searchsorted(ys, cols["y"])
        grid[yi, xi] = cols[name]
        im = ax.imshow(grid, origin="lower", extent=(xs[0], xs[-1], ys[0], ys[-1]),
                       cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, shrink=0.8)
        ax.set_title(name)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
