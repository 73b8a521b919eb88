"""Incremental fast evaluation of fractional-operator history sums.

The full discrete convolution sum_{j<=n} omega_{n-j} u_j is split into a short
exact window of the most recent n0+1 terms plus geometrically growing windows,
each summarized at every contour node by the backward-Euler solution of
y' = lambda*y + u over that window. Per step this costs O(N log n) node
updates instead of O(n) weight multiplies, and the state footprint stays
O(N B log n_max + n0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import (
    ContourKind,
    hyperbolic_node_count,
    hyperbolic_quadrature,
    talbot_quadrature,
    transfer_function,
)
from .fracweights import CorrectionSet, GeneratingFunction, convolution_weights

__all__ = [
    "BinPlan",
    "bin_plan",
    "FastConvState",
    "DirectConvState",
    "fast_discrete_caputo",
    "SequencingError",
    "WindowCoverageError",
]

_HEAD_KEEP = 7  # u_0..u_6, enough for correction sums with m <= 6


class SequencingError(RuntimeError):
    """History values were supplied out of order."""


class WindowCoverageError(RuntimeError):
    """A requested window is not covered by stored blocks (eviction bug)."""


@dataclass(frozen=True)
class BinPlan:
    """Partition of the history [0, n] into a local window plus L level windows."""

    n: int
    n0: int
    B: int
    L: int
    b: tuple[int, ...]

    @property
    def windows(self) -> list[tuple[int, int]]:
        """Level windows [b_ell, b_{ell-1} - 1] for ell = 1..L, outermost last."""
        return [(self.b[ell], self.b[ell - 1] - 1) for ell in range(1, self.L + 1)]

    @property
    def local_window(self) -> tuple[int, int]:
        return (max(0, self.n - self.n0), self.n)


def bin_plan(n: int, n0: int, B: int) -> BinPlan:
    """Window boundaries b_0..b_L for step n.

    b_ell is the smallest multiple of B^ell with n - n0 + 1 - b_ell in
    [B^(ell-1), 2 B^ell - 1]; this choice keeps every level's weight indices
    inside the contour's validity range and never yields an empty window.
    """
    if B < 2:
        raise ValueError("bin basis B must be >= 2")
    if n <= n0:
        return BinPlan(n=n, n0=n0, B=B, L=0, b=(max(0, n - n0),))
    span = n - n0 + 1
    L = 0
    while span >= 2 * B**L:
        L += 1
    b = [n - n0]
    for ell in range(1, L):
        lo = n - n0 + 2 - 2 * B**ell
        b.append(-(-lo // B**ell) * B**ell)
    b.append(0)
    return BinPlan(n=n, n0=n0, B=B, L=L, b=tuple(b))


class _Level:
    """Completed-block store plus a cached window composition for one level."""

    def __init__(self, block_size: int):
        self.block_size = block_size
        self.blocks: list[tuple[int, int, np.ndarray]] = []
        self.cache_lo = -1
        self.cache_hi = -1
        self.cache_y: np.ndarray | None = None

    def evict_before(self, b_ell: int) -> None:
        drop = 0
        while drop < len(self.blocks) and self.blocks[drop][1] <= b_ell:
            drop += 1
        if drop:
            del self.blocks[:drop]

    def composed(self, lo: int, hi: int, inv_block: np.ndarray) -> np.ndarray:
        """Block composition over [lo, hi); forward-only, incrementally cached."""
        if self.cache_y is not None and self.cache_lo == lo and self.cache_hi == hi:
            return self.cache_y
        if not self.blocks or self.blocks[0][0] > lo or self.blocks[-1][1] < hi:
            raise WindowCoverageError(
                f"window [{lo}, {hi}) not covered by stored blocks of size "
                f"{self.block_size}"
            )
        first = self.blocks[0][0]
        if self.cache_y is not None and self.cache_lo == lo and self.cache_hi < hi:
            y = self.cache_y
            pos = self.cache_hi
        else:
            i = (lo - first) // self.block_size
            y = self.blocks[i][2]
            pos = self.blocks[i][1]
        while pos < hi:
            i = (pos - first) // self.block_size
            y = y * inv_block + self.blocks[i][2]
            pos = self.blocks[i][1]
        self.cache_lo, self.cache_hi, self.cache_y = lo, hi, y
        return y


class FastConvState:
    """Streaming engine for sum_{j=0}^n omega_{n-j} u_j over contour-quadrature bins.

    The step horizon n_max is required up front: the deepest window always
    reaches back to index 0, so every level's ODE pipeline must see the history
    from the first step on. ``shift`` is subtracted from every pushed value
    (use shift=u0 for Caputo-style shifted histories).
    """

    def __init__(
        self,
        gf: GeneratingFunction,
        n_max: int,
        B: int = 5,
        n0: int = 50,
        contour: ContourKind = ContourKind.TALBOT,
        N: int | None = 32,
        shift: float | np.ndarray = 0.0,
        shape: int | tuple[int, ...] = (),
        eps: float = 1e-10,
    ):
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        if n0 < 1 or B < 2:
            raise ValueError("need n0 >= 1 and B >= 2")
        self.gf = gf
        self.n_max = n_max
        self.B = B
        self.n0 = n0
        self.contour = ContourKind(contour)
        if N is None:
            N = hyperbolic_node_count(gf.tau, gf.alpha, eps)
        self.N = N
        self.shift = shift
        self.shape = (shape,) if isinstance(shape, int) else tuple(shape)
        self.n = -1
        self.omega_local = convolution_weights(gf, n0).omega
        self._ring = np.zeros((n0 + 1,) + self.shape)
        self.head = np.zeros((_HEAD_KEEP,) + self.shape)
        self.L_total = bin_plan(n_max, n0, B).L
        self.levels = [_Level(B ** (ell - 1)) for ell in range(1, self.L_total + 1)]
        # Stacked per-level node data; row ell-1 belongs to level ell.
        self._wf = np.zeros((self.L_total, N), dtype=complex)
        self._log_inv = np.zeros((self.L_total, N), dtype=complex)
        for ell in range(1, self.L_total + 1):
            t_level = (2 * B**ell - 2 + n0) * gf.tau
            if self.contour is ContourKind.TALBOT:
                quad = talbot_quadrature(N, t_level)
            else:
                quad = hyperbolic_quadrature(N, t_level)
            lam = quad.upper_nodes
            self._wf[ell - 1] = quad.upper_weights * transfer_function(gf, lam)
            self._log_inv[ell - 1] = -np.log(1.0 - lam * gf.tau)
        trail = (1,) * len(self.shape)
        self._inv = np.exp(self._log_inv).reshape((self.L_total, N) + trail)
        self._inv_block = [
            np.exp(self._log_inv[ell - 1] * self.levels[ell - 1].block_size).reshape(
                (N,) + trail
            )
            for ell in range(1, self.L_total + 1)
        ]
        self._inprog = np.zeros((self.L_total, N) + self.shape, dtype=complex)

    def push(self, value) -> None:
        """Append u_n (minus the configured shift); call once per step in order."""
        if self.n + 1 > self.n_max:
            raise SequencingError(f"push beyond configured horizon n_max={self.n_max}")
        self.n += 1
        n = self.n
        v = np.asarray(value, dtype=float) - self.shift
        if v.shape != self.shape:
            raise ValueError(f"value shape {v.shape} != state shape {self.shape}")
        self._ring[n % (self.n0 + 1)] = v
        if n < _HEAD_KEEP:
            self.head[n] = v
        if n >= self.n0 and self.L_total:
            j = n - self.n0
            self._inprog += self.gf.tau * self._ring[j % (self.n0 + 1)]
            self._inprog *= self._inv
            jp = j + 1
            for ell in range(1, self.L_total + 1):
                level = self.levels[ell - 1]
                if jp % level.block_size == 0:
                    level.blocks.append(
                        (jp - level.block_size, jp, self._inprog[ell - 1].copy())
                    )
                    self._inprog[ell - 1] = 0.0
            plan = bin_plan(n, self.n0, self.B)
            for ell in range(1, plan.L + 1):
                self.levels[ell - 1].evict_before(plan.b[ell])

    def _local_dot(self, j_lo: int, j_hi: int, n: int):
        """sum_{j=j_lo}^{j_hi} omega_{n-j} v_j read from the ring buffer."""
        if j_hi < j_lo:
            return np.zeros(self.shape)
        w = self.omega_local[n - j_hi : n - j_lo + 1][::-1]
        size = self.n0 + 1
        a = j_lo % size
        b = j_hi % size + 1
        if a < b:
            return np.tensordot(w, self._ring[a:b], axes=(0, 0))
        hd = self._ring[a:]
        return np.tensordot(w[: hd.shape[0]], hd, axes=(0, 0)) + np.tensordot(
            w[hd.shape[0] :], self._ring[:b], axes=(0, 0)
        )

    def _sum_at(self, n: int):
        plan = bin_plan(n, self.n0, self.B)
        lo = max(0, n - self.n0)
        acc = self._local_dot(lo, min(n, self.n), n)
        if plan.L == 0:
            return acc
        ys = np.empty((plan.L, self.N) + self.shape, dtype=complex)
        exps = np.empty(plan.L)
        for ell in range(1, plan.L + 1):
            w_lo, w_hi = plan.b[ell], plan.b[ell - 1]
            ys[ell - 1] = self.levels[ell - 1].composed(
                w_lo, w_hi, self._inv_block[ell - 1]
            )
            exps[ell - 1] = n - w_hi + 1
        coef = self._wf[: plan.L] * np.exp(self._log_inv[: plan.L] * exps[:, None])
        contrib = 2.0 * np.imag(
            np.tensordot(coef.reshape(-1), ys.reshape((plan.L * self.N,) + self.shape),
                         axes=(0, 0))
        )
        return acc + contrib

    def evaluate(self):
        """Approximate sum_{j=0}^{n} omega_{n-j} v_j at the current step n."""
        if self.n < 0:
            raise SequencingError("no values pushed yet")
        return self._sum_at(self.n)

    def history_next(self):
        """Approximate sum_{j=0}^{n} omega_{n+1-j} v_j, the known part of step n+1."""
        if self.n < 0:
            raise SequencingError("no values pushed yet")
        if self.n + 1 > self.n_max:
            raise SequencingError("next step exceeds configured horizon")
        return self._sum_at(self.n + 1)

    @property
    def state_scalar_count(self) -> int:
        d = int(np.prod(self.shape, dtype=int) or 1)
        count = self._ring.size + self.head.size + 2 * self._inprog.size
        count += 2 * (self._wf.size + self._log_inv.size + self._inv.size)
        for level in self.levels:
            count += 2 * len(level.blocks) * self.N * d
            if level.cache_y is not None:
                count += 2 * self.N * d
        return count


class DirectConvState:
    """Reference O(n) per-step history engine with the same protocol."""

    def __init__(self, gf: GeneratingFunction, n_max: int,
                 shift: float | np.ndarray = 0.0, shape: int | tuple[int, ...] = ()):
        self.gf = gf
        self.n_max = n_max
        self.shift = shift
        self.shape = (shape,) if isinstance(shape, int) else tuple(shape)
        self.omega = convolution_weights(gf, n_max + 1).omega
        self._values = np.zeros((n_max + 1,) + self.shape)
        self.n = -1

    @property
    def head(self) -> np.ndarray:
        return self._values[:_HEAD_KEEP]

    def push(self, value) -> None:
        if self.n + 1 > self.n_max:
            raise SequencingError(f"push beyond configured horizon n_max={self.n_max}")
        self.n += 1
        self._values[self.n] = np.asarray(value, dtype=float) - self.shift

    def _sum_at(self, n: int):
        hi = min(n, self.n)
        w = self.omega[n - hi : n + 1][::-1]
        return np.tensordot(w, self._values[: hi + 1], axes=(0, 0))

    def evaluate(self):
        if self.n < 0:
            raise SequencingError("no values pushed yet")
        return self._sum_at(self.n)

    def history_next(self):
        if self.n < 0:
            raise SequencingError("no values pushed yet")
        return self._sum_at(self.n + 1)

    @property
    def state_scalar_count(self) -> int:
        return (self.n + 1) * int(np.prod(self.shape, dtype=int) or 1)


def fast_discrete_caputo(state: FastConvState | DirectConvState, corr: CorrectionSet | None):
    """Discrete Caputo value at the current step from a shifted-history state.

    The state must have been constructed with shift=u0 and fed the raw solution
    values, so it holds u_j - u_0; the starting-weight correction reads the
    first m of those from the retained head.
    """
    acc = state.evaluate()
    if corr is not None and corr.m:
        gf = state.gf
        row = corr.w_alpha[state.n]
        acc = acc + gf.tau ** (-gf.alpha) * np.tensordot(
            row, state.head[1 : corr.m + 1], axes=(0, 0)
        )
    return acc if state.shape else float(acc)
