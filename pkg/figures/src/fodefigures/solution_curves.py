"""Solution trajectories U(t) from one or more trajectory CSVs."""

from __future__ import annotations

import argparse
import sys

from .csvio import read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", default="solution.png")
    ap.add_argument("--labels", default=None)
    args = ap.parse_args(argv)
    labels = args.labels.split(",") if args.labels else [str(p) for p in args.inputs]
    fig, ax = new_figure()
    for path, label in zip(args.inputs, labels):
        cols = read_columns(path, ["t", "U"])
        ax.plot(cols["t"], cols["U"], lw=0.9, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("U")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
