"""Numba-compiled inner loops for the direct-backend scalar solvers.

At bench sizes (n_T ~ 2^12..2^14) a per-step numpy dot is dominated by Python
call overhead, which would hide the O(n^2) cost of the direct method; these
loops keep the measured complexity honest. The math is identical to the numpy
path and tested against it.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=False, fastmath=True)
def semi_implicit_direct_loop(
    omega,  # omega_dim[0..nT]
    w_alpha,  # (nT+1, m) tau=1 starting weights (zero-width if m = 0)
    w_u,  # (nT+1, m_u)
    w_f,  # (nT+1, m_f)
    v,  # (nT+1,) work/output: v[n] = U_n - u0, filled through n_start
    fvals,  # (nT+1,) work/output: f(U_n, t_n), filled through n_start
    f,
    lam: float,
    kappa: float,
    u0: float,
    tau: float,
    tau_neg_alpha: float,
    q: int,
    n_start: int,
    n_t: int,
    pivot: float,
    divergence: float,
):
    m = w_alpha.shape[1]
    m_u = w_u.shape[1]
    m_f = w_f.shape[1]
    # History dots evaluated blockwise: the prefix contribution of up to
    # `block` future steps is accumulated in one pass over v with contiguous
    # omega reads, then each step adds its few most recent terms. Identical
    # O(n^2) arithmetic to the naive order, but compute-bound instead of
    # bandwidth-bound, so measured times track the flop count.
    block = 64
    old = np.zeros(block)
    n0_block = -(block + 1)
    for n in range(n_start + 1, n_t + 1):
        if n - n0_block >= block:
            n0_block = n
            k = min(block, n_t + 1 - n)
            for i in range(block):
                old[i] = 0.0
            for j in range(n0_block):
                base = n0_block - j
                vj = v[j]
                for i in range(k):
                    old[i] += omega[base + i] * vj
        hist = old[n - n0_block]
        for j in range(n0_block, n):
            hist += omega[n - j] * v[j]
        rhs = lam * u0 - hist
        for j in range(m):
            rhs -= tau_neg_alpha * w_alpha[n, j] * v[j + 1]
        if q == 2:
            rhs += 2.0 * fvals[n - 1] - fvals[n - 2]
            rhs += kappa * (2.0 * v[n - 1] - v[n - 2])
        else:
            rhs += fvals[n - 1]
            rhs += kappa * v[n - 1]
        for j in range(m_f):
            rhs += w_f[n, j] * (fvals[j + 1] - fvals[0])
        for j in range(m_u):
            rhs += kappa * w_u[n, j] * v[j + 1]
        vn = rhs / pivot
        if not np.isfinite(vn) or abs(vn) > divergence:
            return n
        v[n] = vn
        fvals[n] = f(vn + u0, n * tau)
    return 0


@njit(cache=False, fastmath=True)
def direct_convolution_series(omega, u):
    """All partial sums s_n = sum_{j<=n} omega_{n-j} u_j by honest O(n^2) work."""
    n_t = u.shape[0] - 1
    out = np.empty(n_t + 1)
    for n in range(n_t + 1):
        acc = 0.0
        for j in range(n + 1):
            acc += omega[n - j] * u[j]
        out[n] = acc
    return out
