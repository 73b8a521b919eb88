"""Log-log error-vs-tau curves from a convergence CSV (tau, err_*, order_* groups)."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError, read_columns
from .render import new_figure, run_main, save


def render(argv: list[str]) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("-o", "--output", default="convergence.png")
    args = ap.parse_args(argv)
    cols = read_columns(args.input, ["tau"])
    err_cols = [c for c in cols if c.startswith("err_")]
    if not err_cols:
        raise SchemaError("no err_* column groups found")
    fig, ax = new_figure()
    for name in err_cols:
        ax.loglog(cols["tau"], cols[name], "o-", lw=0.9, label=name[4:])
    tau = cols["tau"]
    ref = cols[err_cols[0]][0] * (tau / tau[0]) ** 2
    ax.loglog(tau, ref, "k--", lw=0.7, label="slope 2")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    save(fig, args.output)
    print(f"wrote {args.output}")


def main(argv: list[str] | None = None) -> int:
    return run_main(render, list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
