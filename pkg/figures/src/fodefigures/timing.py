"""Direct-vs-fast timing comparison (log-log) from a bench CSV."""

from __future__ import annotations

import argparse
import sys

from .csvio import read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("-o", "--output", default="timing.png")
    args = ap.parse_args(argv)
    cols = read_columns(args.input, ["n", "direct_time_s", "fast_time_s"])
    fig, ax = new_figure()
    ax.loglog(cols["n"], cols["direct_time_s"], "o-", lw=0.9, label="direct")
    ax.loglog(cols["n"], cols["fast_time_s"], "s-", lw=0.9, label="fast")
    ax.set_xlabel("number of steps")
    ax.set_ylabel("time (s)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
