"""Convolution, starting and correction weights for fractional multistep operators.

The discrete fractional operator acting on a history (u_0, ..., u_n) is

    (1/tau^alpha) [ sum_j omega^(a)_{n-j} (u_j - u_0) + sum_{j<=m} w^(a)_{n,j} (u_j - u_0) ]

where the omega^(a) are Maclaurin coefficients of a generating function and the
starting weights w^(a) restore accuracy for solutions with weak power
singularities at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "Family",
    "GeneratingFunction",
    "WeightTable",
    "CorrectionSet",
    "UnsupportedOrderError",
    "IllConditionedError",
    "gngf_coefficients",
    "convolution_weights",
    "generating_series",
    "starting_weights",
    "starting_weight_table",
    "perturbation",
    "correction_weights_E",
    "correction_weight_table",
    "discrete_caputo_direct",
    "gamma_ratio",
    "build_correction_set",
    "weight_table_to_csv",
]

MAX_ORDER = 6
MAX_CORRECTIONS = 6
_COND_LIMIT = 1e13


class Family(str, Enum):
    """Generating-function family for the convolution weights."""

    FBDF = "fbdf"
    GNGF = "gngf"


class UnsupportedOrderError(ValueError):
    """Requested method order outside the supported range 1..6."""


class IllConditionedError(RuntimeError):
    """Moment system for starting/correction weights is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


def gngf_coefficients(alpha: float, p: int) -> list[float]:
    """Polynomial coefficients g_0..g_{p-1} of the generalized Newton-Gregory family."""
    if not 1 <= p <= MAX_ORDER:
        raise UnsupportedOrderError(f"order p={p} outside supported range 1..{MAX_ORDER}")
    a = alpha
    g = [
        1.0,
        a / 2.0,
        a**2 / 8.0 + 5.0 * a / 24.0,
        a**3 / 48.0 + 5.0 * a**2 / 48.0 + a / 8.0,
        a**4 / 384.0 + 5.0 * a**3 / 192.0 + 97.0 * a**2 / 1152.0 + 251.0 * a / 2880.0,
        a**5 / 3840.0 + 5.0 * a**4 / 1152.0 + 61.0 * a**3 / 2304.0
        + 401.0 * a**2 / 5760.0 + 19.0 * a / 288.0,
    ]
    return g[:p]


@dataclass(frozen=True)
class GeneratingFunction:
    """One convolution-weight generating function omega(p, alpha, tau, z)."""

    family: Family
    p: int
    alpha: float
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not 1 <= self.p <= MAX_ORDER:
            raise UnsupportedOrderError(
                f"order p={self.p} outside supported range 1..{MAX_ORDER}"
            )
        if not self.tau > 0:
            raise ValueError(f"step size tau={self.tau} must be positive")
        if not (-1.0 < self.alpha <= 1.0) or self.alpha == 0.0:
            raise ValueError(
                f"fractional order alpha={self.alpha} must lie in (-1, 0) or (0, 1]"
            )
        object.__setattr__(self, "family", Family(self.family))

    def with_tau(self, tau: float) -> "GeneratingFunction":
        return GeneratingFunction(self.family, self.p, self.alpha, tau)


@dataclass(frozen=True)
class WeightTable:
    """Convolution weights omega_0..omega_{n_max} in the tau^(-alpha) scale."""

    gf: GeneratingFunction
    omega: np.ndarray

    def __post_init__(self) -> None:
        self.omega.setflags(write=False)

    def __len__(self) -> int:
        return self.omega.size

    @property
    def omega_normalized(self) -> np.ndarray:
        """Weights of omega(p, alpha, 1, z), i.e. tau^alpha * omega_n."""
        return self.omega * self.gf.tau**self.gf.alpha


def _fbdf_poly(p: int) -> np.ndarray:
    """z-power coefficients of sum_{k=1}^p (1-z)^k / k."""
    c = np.zeros(p + 1)
    for k in range(1, p + 1):
        for j in range(k + 1):
            c[j] += math.comb(k, j) * (-1.0) ** j / k
    return c


def _gngf_poly(alpha: float, p: int) -> np.ndarray:
    """z-power coefficients of sum_{k=0}^{p-1} g_k (1-z)^k."""
    g = gngf_coefficients(alpha, p)
    c = np.zeros(p)
    for k, gk in enumerate(g):
        for j in range(k + 1):
            c[j] += gk * math.comb(k, j) * (-1.0) ** j
    return c


def _binom_series(alpha: float, n_max: int) -> np.ndarray:
    """Maclaurin coefficients of (1-z)^alpha via the stable ratio recurrence."""
    n = np.arange(1, n_max + 1)
    ratios = (n - 1 - alpha) / n
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max:
        out[1:] = np.cumprod(ratios)
    return out


def _power_series(c: np.ndarray, alpha: float, n_max: int) -> np.ndarray:
    """Maclaurin coefficients of (sum c_k z^k)^alpha, c_0 > 0 (Miller recurrence)."""
    p = c.size - 1
    w = np.zeros(n_max + 1)
    w[0] = c[0] ** alpha
    for n in range(1, n_max + 1):
        acc = 0.0
        for k in range(1, min(n, p) + 1):
            acc += ((alpha + 1.0) * k - n) * c[k] * w[n - k]
        w[n] = acc / (n * c[0])
    return w


def convolution_weights(gf: GeneratingFunction, n_max: int) -> WeightTable:
    """Maclaurin coefficients omega_0..omega_{n_max} of the generating function."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if gf.family is Family.FBDF:
        w = _power_series(_fbdf_poly(gf.p), gf.alpha, n_max)
    else:
        b = _binom_series(gf.alpha, n_max)
        q = _gngf_poly(gf.alpha, gf.p)
        w = np.zeros(n_max + 1)
        for j, qj in enumerate(q):
            if qj != 0.0:
                w[j:] += qj * b[: n_max + 1 - j]
    return WeightTable(gf=gf, omega=w * gf.tau ** (-gf.alpha))


def generating_series(gf: GeneratingFunction, z: np.ndarray | complex) -> np.ndarray | complex:
    """Evaluate omega(p, alpha, tau, z) on the principal branch."""
    z = np.asarray(z, dtype=complex)
    one_minus = 1.0 - z
    if gf.family is Family.FBDF:
        acc = np.zeros_like(z)
        for k in range(gf.p, 0, -1):
            acc = (acc + 1.0 / k) * one_minus
        val = (acc / gf.tau) ** gf.alpha
    else:
        g = gngf_coefficients(gf.alpha, gf.p)
        poly = np.zeros_like(z)
        for gk in reversed(g):
            poly = poly * one_minus + gk
        val = (one_minus / gf.tau) ** gf.alpha * poly
    return val if val.shape else complex(val)


def gamma_ratio(sigma: float, alpha: float) -> float:
    """Gamma(sigma+1) / Gamma(sigma+1-alpha), the Caputo image scale of t^sigma."""
    return math.exp(math.lgamma(sigma + 1.0) - math.lgamma(sigma + 1.0 - alpha))


def _validate_exponents(sigma: np.ndarray) -> np.ndarray:
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma.size == 0 or sigma.size > MAX_CORRECTIONS:
        raise ValueError(f"need 1..{MAX_CORRECTIONS} correction exponents, got {sigma.size}")
    if np.any(sigma <= 0) or np.any(np.diff(sigma) <= 0):
        raise ValueError("correction exponents must be strictly increasing and positive")
    return sigma


def _moment_solve(rhs: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Solve the m x m moment system A[r, j] = j^sigma_r with scaling + refinement.

    rhs has shape (m,) or (m, k); returns matching shape.
    """
    m = sigma.size
    j = np.arange(1, m + 1, dtype=float)
    a = j[None, :] ** sigma[:, None]
    col = np.max(np.abs(a), axis=0)
    a_scaled = a / col
    cond = np.linalg.cond(a_scaled)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditionedError(
            "moment system for correction exponents is too ill-conditioned "
            f"(sigma={sigma.tolist()})",
            condition=float(cond),
        )
    x = np.linalg.solve(a_scaled, rhs)
    # One residual-refinement pass; the Vandermonde-like matrix is mildly
    # ill-conditioned already at m = 4.
    x += np.linalg.solve(a_scaled, rhs - a_scaled @ x)
    return (x.T / col).T


def _history_moments(omega_normalized: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """conv[r, n] = sum_{j=0}^n omega^(a)_{n-j} j^{sigma_r} for all n at once."""
    n_max = omega_normalized.size - 1
    j = np.arange(n_max + 1, dtype=float)
    out = np.empty((sigma.size, n_max + 1))
    for r, s in enumerate(sigma):
        src = j**s
        if n_max <= 2048:
            out[r] = np.convolve(omega_normalized, src)[: n_max + 1]
        else:
            out[r] = fftconvolve(omega_normalized, src)[: n_max + 1]
    return out


def starting_weight_table(gf: GeneratingFunction, sigma, n_max: int) -> np.ndarray:
    """Operator starting weights w^(a)_{n, 1..m} for every n = 0..n_max.

    Row n solves the moment conditions making the discrete operator exact on
    t^{sigma_r}; row 0 is zero (the operator is never applied at n = 0).
    """
    sigma = _validate_exponents(sigma)
    table = convolution_weights(gf.with_tau(1.0), n_max)
    conv = _history_moments(table.omega, sigma)
    n = np.arange(n_max + 1, dtype=float)
    rhs = np.empty_like(conv)
    for r, s in enumerate(sigma):
        scale = gamma_ratio(s, gf.alpha)
        with np.errstate(divide="ignore"):
            target = scale * n ** (s - gf.alpha)
        target[0] = 0.0
        rhs[r] = target - conv[r]
    w = _moment_solve(rhs, sigma).T
    w[0] = 0.0
    return w


def starting_weights(gf: GeneratingFunction, sigma, n: int) -> np.ndarray:
    """Single row w^(a)_{n, 1..m} of the operator starting weights."""
    if n < 1:
        raise ValueError("starting weights are defined for n >= 1")
    return starting_weight_table(gf, sigma, n)[n]


def perturbation(q: int, u) -> float:
    """q-th order backward-difference penalty E_q^n(u) from the latest values.

    u supplies (u_{n-1}, u_n) for q = 1 and (u_{n-2}, u_{n-1}, u_n) for q = 2.
    """
    if q == 1:
        if len(u) < 2:
            raise ValueError("q=1 perturbation needs the last two values")
        return u[-1] - u[-2]
    if q == 2:
        if len(u) < 3:
            raise ValueError("q=2 perturbation needs the last three values")
        return u[-1] - 2.0 * u[-2] + u[-3]
    raise ValueError(f"perturbation order q={q} unsupported (only q in {{1, 2}})")


def correction_weight_table(q: int, sigma, n_max: int) -> np.ndarray:
    """Correction weights w_{n, 1..m} annihilating E_q on t^{sigma_r}, all n <= n_max.

    The weights are step-size free: the tau^sigma factors cancel from both
    sides of the defining condition. Rows n < q are zero (E_q undefined there).
    """
    if q not in (1, 2):
        raise ValueError(f"perturbation order q={q} unsupported (only q in {{1, 2}})")
    sigma = _validate_exponents(sigma)
    n = np.arange(n_max + 1, dtype=float)
    rhs = np.empty((sigma.size, n_max + 1))
    for r, s in enumerate(sigma):
        if q == 1:
            vals = n**s - np.maximum(n - 1.0, 0.0) ** s
        else:
            vals = n**s - 2.0 * np.maximum(n - 1.0, 0.0) ** s + np.maximum(n - 2.0, 0.0) ** s
        vals[: q] = 0.0
        rhs[r] = vals
    w = _moment_solve(rhs, sigma).T
    w[:q] = 0.0
    return w


def correction_weights_E(q: int, sigma, n: int, tau: float = 1.0) -> np.ndarray:
    """Single row of perturbation-correction weights; independent of tau."""
    if n < q:
        raise ValueError(f"correction weights need n >= q (n={n}, q={q})")
    del tau
    return correction_weight_table(q, sigma, n)[n]


@dataclass(frozen=True)
class CorrectionSet:
    """Starting / correction weight tables for one scheme configuration.

    ``w_alpha`` rows pair with exponents ``sigma`` (operator starting weights,
    tau=1 normalization), ``w_u`` with ``sigma_u`` and ``w_f`` with ``delta_f``
    (perturbation corrections for the solution resp. the nonlinearity).
    Empty exponent tuples give zero-column tables.
    """

    sigma: tuple[float, ...]
    sigma_u: tuple[float, ...]
    delta_f: tuple[float, ...]
    w_alpha: np.ndarray
    w_u: np.ndarray
    w_f: np.ndarray

    @property
    def m(self) -> int:
        return len(self.sigma)

    @property
    def m_u(self) -> int:
        return len(self.sigma_u)

    @property
    def m_f(self) -> int:
        return len(self.delta_f)


def build_correction_set(
    gf: GeneratingFunction,
    sigma=(),
    sigma_u=(),
    delta_f=(),
    q: int = 2,
    n_max: int = 0,
) -> CorrectionSet:
    """Assemble all weight tables needed by a scheme up to step n_max."""
    sigma = tuple(float(s) for s in np.atleast_1d(sigma)) if len(np.atleast_1d(sigma)) else ()
    sigma_u = tuple(float(s) for s in np.atleast_1d(sigma_u)) if len(np.atleast_1d(sigma_u)) else ()
    delta_f = tuple(float(s) for s in np.atleast_1d(delta_f)) if len(np.atleast_1d(delta_f)) else ()
    w_alpha = (
        starting_weight_table(gf, sigma, n_max) if sigma else np.zeros((n_max + 1, 0))
    )
    w_u = (
        correction_weight_table(q, sigma_u, n_max) if sigma_u else np.zeros((n_max + 1, 0))
    )
    w_f = (
        correction_weight_table(q, delta_f, n_max) if delta_f else np.zeros((n_max + 1, 0))
    )
    return CorrectionSet(sigma, sigma_u, delta_f, w_alpha, w_u, w_f)


def discrete_caputo_direct(
    gf: GeneratingFunction,
    corr: CorrectionSet | None,
    u: np.ndarray,
    u0: float,
    n: int,
) -> float:
    """Discrete Caputo value at step n by direct O(n) summation."""
    u = np.asarray(u, dtype=float)
    if u.size < n + 1:
        raise ValueError(f"history of length {u.size} too short for step n={n}")
    v = u[: n + 1] - u0
    omega = convolution_weights(gf, n).omega
    acc = float(np.dot(omega[::-1], v))
    if corr is not None and corr.m:
        head = u[1 : corr.m + 1] - u0
        acc += float(np.dot(corr.w_alpha[n], head)) * gf.tau ** (-gf.alpha)
    return acc


def weight_table_to_csv(table: WeightTable, path) -> None:
    """Write a weight table as CSV with a configuration header line."""
    gf = table.gf
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# family={gf.family.value},p={gf.p},alpha={gf.alpha},tau={gf.tau}\n")
        fh.write("n,omega_n\n")
        for i, w in enumerate(table.omega):
            fh.write(f"{i},{float(w)!r}\n")
