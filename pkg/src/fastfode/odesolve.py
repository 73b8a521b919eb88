"""Time-stepping drivers for scalar and small-system nonlinear FODEs.

``semi_implicit_solve`` treats the nonlinearity explicitly through a
second-order extrapolation stabilized by a kappa-weighted backward-difference
penalty, so each step solves a linear scalar (or constant-matrix) equation.
``implicit_solve`` is the fully implicit reference with per-step Newton.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import _kernels
from .contour import talbot_quadrature
from .fastconv import DirectConvState, FastConvState
from .fracweights import (
    CorrectionSet,
    Family,
    GeneratingFunction,
    build_correction_set,
    convolution_weights,
)

__all__ = [
    "Backend",
    "SchemeConfig",
    "Trajectory",
    "InstabilityError",
    "NewtonError",
    "semi_implicit_solve",
    "implicit_solve",
    "semi_implicit_solve_system",
    "mittag_leffler",
    "mittag_leffler_neg_t",
    "error_report",
    "observed_orders",
    "kappa_guideline",
]

_EPS = np.finfo(float).eps


class InstabilityError(RuntimeError):
    """Numerical solution diverged or became non-finite."""

    def __init__(self, step: int, t: float):
        super().__init__(f"solution diverged at step {step} (t = {t:g})")
        self.step = step
        self.t = t


class NewtonError(RuntimeError):
    """Newton iteration failed to converge within the iteration budget."""


@dataclass(frozen=True)
class Backend:
    """History-sum backend selection: direct O(n^2) or contour-compressed."""

    kind: str = "fast"  # "direct" | "fast"
    B: int = 5
    n0: int = 50
    contour: str = "talbot"
    N: int | None = 32

    def make_state(self, gf: GeneratingFunction, n_max: int, shape=()):
        if self.kind == "direct":
            return DirectConvState(gf, n_max, shape=shape)
        if self.kind == "fast":
            return FastConvState(
                gf, n_max, B=self.B, n0=self.n0, contour=self.contour,
                N=self.N, shape=shape,
            )
        raise ValueError(f"unknown backend kind {self.kind!r}")


@dataclass(frozen=True)
class SchemeConfig:
    """One time-stepping configuration for D^alpha u = lam*u + f(u, t)."""

    family: Family = Family.GNGF
    p: int = 2
    alpha: float = 0.5
    q: int = 2
    lam: float = -1.0
    kappa: float = 0.0
    sigma: tuple[float, ...] = ()
    sigma_u: tuple[float, ...] = ()
    delta_f: tuple[float, ...] = ()
    tau: float = 0.01
    T: float = 1.0
    backend: Backend = field(default_factory=Backend)
    newton_atol: float = 1e-12
    newton_rtol: float = 1e-10
    newton_max_iter: int = 50
    divergence_factor: float = 1e6

    def __post_init__(self) -> None:
        if self.q not in (1, 2):
            raise ValueError("perturbation order q must be 1 or 2")
        for name, exps in (("sigma", self.sigma), ("sigma_u", self.sigma_u),
                           ("delta_f", self.delta_f)):
            if len(exps) > 6:
                raise ValueError(f"at most 6 correction exponents supported ({name})")
        if self.sigma and self.sigma[-1] >= self.alpha + self.p:
            warnings.warn(
                "largest operator correction exponent >= alpha + p; the stability "
                "theory does not cover this configuration", stacklevel=2)
        if (self.sigma_u and self.sigma_u[-1] >= self.q) or (
                self.delta_f and self.delta_f[-1] >= self.q):
            warnings.warn(
                "perturbation correction exponents >= q; the stability theory "
                "does not cover this configuration", stacklevel=2)

    @property
    def gf(self) -> GeneratingFunction:
        return GeneratingFunction(self.family, self.p, self.alpha, self.tau)

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.tau)
        if abs(n * self.tau - self.T) > 1e-9 * self.T:
            raise ValueError("T must be an integer multiple of tau")
        return n

    @property
    def n_start(self) -> int:
        return max(self.q, len(self.sigma), len(self.sigma_u), len(self.delta_f))


@dataclass
class Trajectory:
    """Solution samples plus solver diagnostics."""

    t: np.ndarray
    values: np.ndarray
    reference: np.ndarray | None = None
    newton_iterations: list[int] = field(default_factory=list)
    wall_time: float = 0.0


def _fd_derivative(f: Callable, u: float, t: float) -> float:
    h = math.sqrt(_EPS) * (1.0 + abs(u))
    return (f(u + h, t) - f(u - h, t)) / (2.0 * h)


def _coupled_implicit_start(cfg: SchemeConfig, f, df, u0: float,
                            omega: np.ndarray, corr: CorrectionSet,
                            s: int) -> np.ndarray:
    """Solve steps 1..s of the fully implicit method as one Newton system.

    For n < m the starting-weight sum references later steps, so the first
    start-up equations are genuinely coupled.
    """
    m = corr.m
    tau = cfg.tau
    tna = tau ** (-cfg.alpha)
    u = np.full(s, u0, dtype=float)

    def residual(u_vec: np.ndarray) -> np.ndarray:
        r = np.empty(s)
        for k in range(1, s + 1):
            uk = u_vec[k - 1]
            acc = 0.0  # the j = 0 history term vanishes: u_0 - u_0
            for j in range(1, k + 1):
                acc += omega[k - j] * (u_vec[j - 1] - u0)
            for j in range(1, m + 1):
                acc += tna * corr.w_alpha[k, j - 1] * (u_vec[j - 1] - u0)
            r[k - 1] = acc - cfg.lam * uk - f(uk, k * tau)
        return r

    for _ in range(cfg.newton_max_iter):
        r = residual(u)
        jac = np.zeros((s, s))
        for k in range(1, s + 1):
            for i in range(1, s + 1):
                if i <= k:
                    jac[k - 1, i - 1] += omega[k - i]
                if i <= m:
                    jac[k - 1, i - 1] += tna * corr.w_alpha[k, i - 1]
            dfd = df(u[k - 1], k * tau) if df else _fd_derivative(f, u[k - 1], k * tau)
            jac[k - 1, k - 1] -= cfg.lam + dfd
        delta = np.linalg.solve(jac, r)
        u -= delta
        if np.max(np.abs(delta)) <= cfg.newton_atol + cfg.newton_rtol * np.max(np.abs(u)):
            break
    else:
        raise NewtonError(f"start-up Newton failed to converge in {cfg.newton_max_iter} iterations")
    if not np.all(np.isfinite(u)):
        raise InstabilityError(step=1, t=tau)
    return u


def _corrections(cfg: SchemeConfig) -> CorrectionSet:
    return build_correction_set(
        cfg.gf.with_tau(1.0), cfg.sigma, cfg.sigma_u, cfg.delta_f,
        q=cfg.q, n_max=cfg.n_steps,
    )


def _is_numba_function(f) -> bool:
    return _kernels.HAVE_NUMBA and hasattr(f, "nopython_signatures")


def semi_implicit_solve(cfg: SchemeConfig, f: Callable, u0: float,
                        df: Callable | None = None,
                        start_values: Sequence[float] | None = None) -> Trajectory:
    """Run the stabilized semi-implicit scheme; each step is one linear solve.

    ``df`` is only used by the implicit start-up steps (finite differences
    otherwise). ``start_values`` optionally supplies externally known values
    U_1..U_s (s >= max(q-1, m, m_u, m_f)), the convention of published
    convergence tables; by default the start-up steps are solved by the
    coupled fully implicit method. Raises InstabilityError with the step
    index on divergence.
    """
    t_begin = time.perf_counter()
    n_t = cfg.n_steps
    tau = cfg.tau
    corr = _corrections(cfg)
    omega = convolution_weights(cfg.gf, max(n_t + 1, cfg.n_start)).omega
    pivot = omega[0] - cfg.lam + cfg.kappa
    if abs(pivot) < 1e-14 * (abs(omega[0]) + abs(cfg.lam) + abs(cfg.kappa)):
        raise ValueError("degenerate configuration: omega_0/tau^alpha - lambda + kappa = 0")
    v = np.zeros(n_t + 1)
    fvals = np.zeros(n_t + 1)
    fvals[0] = f(u0, 0.0)
    if start_values is not None:
        needed = max(cfg.q - 1, len(cfg.sigma), len(cfg.sigma_u), len(cfg.delta_f))
        if len(start_values) < needed:
            raise ValueError(f"start_values must cover at least the first {needed} steps")
        n_start = min(len(start_values), n_t)
        v[1 : n_start + 1] = np.asarray(start_values[:n_start], dtype=float) - u0
        for k in range(1, n_start + 1):
            fvals[k] = f(v[k] + u0, k * tau)
    else:
        n_start = min(cfg.n_start, n_t)
        if n_start >= 1:
            head = _coupled_implicit_start(cfg, f, df, u0, omega, corr, n_start)
            v[1 : n_start + 1] = head - u0
            for k in range(1, n_start + 1):
                fvals[k] = f(head[k - 1], k * tau)
    divergence = cfg.divergence_factor * max(1.0, abs(u0))
    tna = tau ** (-cfg.alpha)

    if cfg.backend.kind == "direct" and _is_numba_function(f):
        bad = _kernels.semi_implicit_direct_loop(
            omega, corr.w_alpha, corr.w_u, corr.w_f, v, fvals, f,
            float(cfg.lam), float(cfg.kappa), float(u0), tau, tna,
            cfg.q, n_start, n_t, float(pivot), divergence,
        )
        if bad:
            raise InstabilityError(step=int(bad), t=bad * tau)
    else:
        state = cfg.backend.make_state(cfg.gf, n_t)
        for j in range(n_start + 1):
            state.push(v[j])
        m, m_u, m_f = corr.m, corr.m_u, corr.m_f
        for n in range(n_start + 1, n_t + 1):
            hist = state.history_next()
            rhs = cfg.lam * u0 - hist
            if m:
                rhs -= tna * float(np.dot(corr.w_alpha[n], v[1 : m + 1]))
            if cfg.q == 2:
                rhs += 2.0 * fvals[n - 1] - fvals[n - 2]
                rhs += cfg.kappa * (2.0 * v[n - 1] - v[n - 2])
            else:
                rhs += fvals[n - 1]
                rhs += cfg.kappa * v[n - 1]
            if m_f:
                rhs += float(np.dot(corr.w_f[n], fvals[1 : m_f + 1] - fvals[0]))
            if m_u:
                rhs += cfg.kappa * float(np.dot(corr.w_u[n], v[1 : m_u + 1]))
            vn = rhs / pivot
            if not np.isfinite(vn) or abs(vn) > divergence:
                raise InstabilityError(step=n, t=n * tau)
            v[n] = vn
            fvals[n] = f(vn + u0, n * tau)
            state.push(vn)
    return Trajectory(
        t=np.arange(n_t + 1) * tau,
        values=v + u0,
        wall_time=time.perf_counter() - t_begin,
    )


def implicit_solve(cfg: SchemeConfig, f: Callable, u0: float,
                   df: Callable | None = None) -> Trajectory:
    """Fully implicit method with per-step Newton iteration."""
    t_begin = time.perf_counter()
    n_t = cfg.n_steps
    tau = cfg.tau
    corr = _corrections(cfg)
    omega = convolution_weights(cfg.gf, max(n_t + 1, corr.m)).omega
    n_start = min(corr.m, n_t)
    v = np.zeros(n_t + 1)
    iters: list[int] = []
    if n_start >= 1:
        head = _coupled_implicit_start(cfg, f, df, u0, omega, corr, n_start)
        v[1 : n_start + 1] = head - u0
    state = cfg.backend.make_state(cfg.gf, n_t)
    for j in range(n_start + 1):
        state.push(v[j])
    tna = tau ** (-cfg.alpha)
    m = corr.m
    divergence = cfg.divergence_factor * max(1.0, abs(u0))
    for n in range(n_start + 1, n_t + 1):
        hist = state.history_next()
        sc = tna * float(np.dot(corr.w_alpha[n], v[1 : m + 1])) if m else 0.0
        t_n = n * tau
        u = v[n - 1] + u0
        converged = False
        for it in range(cfg.newton_max_iter + 1):
            r = omega[0] * (u - u0) + hist + sc - cfg.lam * u - f(u, t_n)
            if abs(r) <= cfg.newton_atol + cfg.newton_rtol * abs(u):
                converged = True
                iters.append(it)  # number of Newton updates taken
                break
            dfd = df(u, t_n) if df else _fd_derivative(f, u, t_n)
            u -= r / (omega[0] - cfg.lam - dfd)
        if not converged:
            raise NewtonError(f"Newton failed at step {n} (t = {t_n:g})")
        if not np.isfinite(u) or abs(u) > divergence:
            raise InstabilityError(step=n, t=t_n)
        v[n] = u - u0
        state.push(v[n])
    return Trajectory(
        t=np.arange(n_t + 1) * tau,
        values=v + u0,
        newton_iterations=iters,
        wall_time=time.perf_counter() - t_begin,
    )


def semi_implicit_solve_system(
    alphas: Sequence[float],
    A: np.ndarray,
    f: Callable,
    u0: np.ndarray,
    kappa: np.ndarray,
    tau: float,
    T: float,
    family: Family = Family.GNGF,
    p: int = 2,
    q: int = 2,
    backend: Backend | None = None,
    divergence_factor: float = 1e6,
) -> Trajectory:
    """Semi-implicit stepping for D^alpha_i u_i = (A u)_i + f_i(u, t), no corrections.

    kappa is a diagonal stabilization matrix (given as a vector of its
    diagonal); the constant step matrix is factored once.
    """
    backend = backend or Backend()
    alphas = np.asarray(alphas, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    d = u0.size
    kappa = np.asarray(kappa, dtype=float)
    n_t = round(T / tau)
    gfs = [GeneratingFunction(family, p, a, tau) for a in alphas]
    omega0 = np.array([convolution_weights(g, 0).omega[0] for g in gfs])
    states = [backend.make_state(g, n_t) for g in gfs]
    step_matrix = np.diag(omega0 + kappa) - A
    lu = lu_factor(step_matrix)
    implicit_lu = lu_factor(np.diag(omega0) - A)
    v = np.zeros((n_t + 1, d))
    fvals = np.zeros((n_t + 1, d))
    fvals[0] = f(u0, 0.0)
    n_start = min(q, n_t)
    for i in range(d):
        states[i].push(0.0)
    # Implicit (Picard) start-up steps; no correction terms in system mode.
    for n in range(1, n_start + 1):
        hist = np.array([states[i].history_next() for i in range(d)])
        u = v[n - 1] + u0
        for _ in range(100):
            rhs = A @ u0 + f(u, n * tau) - hist
            v_new = lu_solve(implicit_lu, rhs)
            done = np.max(np.abs(v_new + u0 - u)) < 1e-12 * (1 + np.max(np.abs(u)))
            u = v_new + u0
            if done:
                break
        v[n] = u - u0
        fvals[n] = f(u, n * tau)
        for i in range(d):
            states[i].push(v[n, i])
    divergence = divergence_factor * max(1.0, float(np.max(np.abs(u0))))
    for n in range(n_start + 1, n_t + 1):
        hist = np.array([states[i].history_next() for i in range(d)])
        if q == 2:
            expl = 2.0 * fvals[n - 1] - fvals[n - 2] + kappa * (2.0 * v[n - 1] - v[n - 2])
        else:
            expl = fvals[n - 1] + kappa * v[n - 1]
        rhs = A @ u0 - hist + expl
        vn = lu_solve(lu, rhs)
        if not np.all(np.isfinite(vn)) or np.max(np.abs(vn)) > divergence:
            raise InstabilityError(step=n, t=n * tau)
        v[n] = vn
        fvals[n] = f(vn + u0, n * tau)
        for i in range(d):
            states[i].push(vn[i])
    return Trajectory(t=np.arange(n_t + 1) * tau, values=v + u0)


# --- Mittag-Leffler evaluation ------------------------------------------------

_ML_N = 32
_SERIES_CANCEL_LIMIT = 7.0


def _ml_series(alpha: float, x: float) -> float:
    acc = 1.0
    term = 1.0
    k = 0
    sign = -1.0 if x < 0 else 1.0
    ax = abs(x)
    while k < 600:
        k += 1
        log_term = k * math.log(ax) - math.lgamma(alpha * k + 1.0) if ax > 0 else -math.inf
        term = sign**k * math.exp(log_term) if ax > 0 else 0.0
        acc += term
        if abs(term) <= 1e-17 * abs(acc) and alpha * k > abs(x) ** (1.0 / alpha):
            break
    return acc


def _ml_contour_neg(alpha: float, c: float, t: np.ndarray) -> np.ndarray:
    """E_alpha(-c t^alpha) by Talbot inversion of s^(alpha-1)/(s^alpha + c)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    quad = talbot_quadrature(_ML_N, 1.0)
    lam = quad.upper_nodes[None, :] / t[:, None]
    wts = quad.upper_weights[None, :] / t[:, None]
    ghat = lam ** (alpha - 1.0) / (lam**alpha + c)
    vals = 2.0 * np.imag(np.sum(wts * np.exp(lam * t[:, None]) * ghat, axis=1))
    return vals


def mittag_leffler(alpha: float, x: float) -> float:
    """E_alpha(x) = sum x^k / Gamma(alpha k + 1); primary range x <= 0.

    Uses the power series while its cancellation stays harmless and a Talbot
    Laplace inversion for more negative arguments.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1]")
    if x == 0.0:
        return 1.0
    if x > 0.0:
        if x ** (1.0 / alpha) > _SERIES_CANCEL_LIMIT:
            raise ValueError("positive arguments beyond the series range are unsupported")
        return _ml_series(alpha, x)
    if (-x) ** (1.0 / alpha) <= _SERIES_CANCEL_LIMIT:
        return _ml_series(alpha, x)
    return float(_ml_contour_neg(alpha, -x, np.array([1.0]))[0])


def mittag_leffler_neg_t(alpha: float, c: float, t) -> np.ndarray:
    """Vectorized E_alpha(-c t^alpha) over a time array (c >= 0)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.ones_like(t)
    x = c * t**alpha
    series_mask = (t > 0) & (x ** (1.0 / alpha) <= _SERIES_CANCEL_LIMIT)
    contour_mask = (t > 0) & ~series_mask
    for i in np.nonzero(series_mask)[0]:
        out[i] = _ml_series(alpha, -x[i])
    if contour_mask.any():
        out[contour_mask] = _ml_contour_neg(alpha, c, t[contour_mask])
    return out


# --- error reporting -----------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    max_relative: float
    pointwise_relative: np.ndarray
    reference_sup: float


def error_report(traj: Trajectory, reference: np.ndarray) -> ErrorReport:
    """Sup-norm relative error and pointwise relative errors against a reference."""
    ref = np.asarray(reference, dtype=float)
    if ref.shape != traj.values.shape:
        raise ValueError("reference grid does not match the trajectory")
    sup = float(np.max(np.abs(ref)))
    err = np.abs(traj.values - ref)
    return ErrorReport(
        max_relative=float(np.max(err)) / sup,
        pointwise_relative=err / sup,
        reference_sup=sup,
    )


def observed_orders(errors: Sequence[float]) -> list[float]:
    """log2 ratios of successive errors under tau halving."""
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


def kappa_guideline(lam_bound: float, rho_bound: float) -> float:
    """Practical stabilization strength from bounds on the linear part and df/du."""
    return max(0.0, (lam_bound - 3.0 * rho_bound) / 4.0)
