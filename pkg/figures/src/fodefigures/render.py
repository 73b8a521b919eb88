"""Deterministic matplotlib setup: same CSV in, byte-identical PNG out."""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SAVE_KW = {"dpi": 120, "metadata": {"Software": "fode-figures"}}


def new_figure(width: float = 5.0, height: float = 4.0):
    return plt.subplots(figsize=(width, height))


def save(fig, out: str | Path) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def run_main(render_fn, argv) -> int:
    """Shared CLI wrapper: schema failures exit 2 without writing a file."""
    from .csvio import SchemaError

    try:
        render_fn(argv)
        return 0
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
