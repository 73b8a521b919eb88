"""The benchmark problems driven by the CLI and the acceptance suite.

Scalar cases (all with linear part lambda = -1):
  1.1  f = -2u, u0 = 3; exact solution 3 E_alpha(-3 t^alpha).
  1.2  f = -u^2 + g(t) manufactured so u = 2 + t + t^2/2 + t^3/3 + t^4/4.
  1.3  f = u(1 - u^2) + 2 cos(2 pi t), u0 = 1; no closed form.

PDE cases on (0,1)^2 with homogeneous Dirichlet data:
  2.1  f = -v u^2 + fhat, g = -v^2 u + ghat manufactured so
       u = E_a1(-t^a1) sin(pi x) sin(pi y), v likewise with a2.
  2.2  u0 = x(1-x)y(1-y), v0 = sin(pi x) sin(pi y), f = -u^2 v, g = -v^2 u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._kernels import HAVE_NUMBA
from .odesolve import mittag_leffler_neg_t

if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*a, **k):
        return a[0] if (a and callable(a[0])) else (lambda f: f)

__all__ = [
    "ScalarCase",
    "CASE_I",
    "CASE_II",
    "CASE_III",
    "scalar_case",
    "case_sigma",
    "case2_exact",
    "case2_g_poly",
    "pde_case1_terms",
    "pde_case2_terms",
]

_TWO_PI = 2.0 * math.pi


@njit(cache=False)
def _f_case1(u: float, t: float) -> float:
    return -2.0 * u


def _g_poly_coeffs(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    # u = 2 + t + t^2/2 + t^3/3 + t^4/4; D^alpha u has exponents k - alpha.
    c = np.array([1.0, 0.5, 1.0 / 3.0, 0.25])
    dcoef = np.array([
        c[k - 1] * math.gamma(k + 1.0) / math.gamma(k + 1.0 - alpha) for k in (1, 2, 3, 4)
    ])
    return c, dcoef


def case2_exact(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 2.0 + t + t**2 / 2.0 + t**3 / 3.0 + t**4 / 4.0


def case2_g_poly(alpha: float) -> Callable[[float], float]:
    """The forcing g(t) making u = 2 + t + ... + t^4/4 exact for case 1.2."""
    c, dcoef = _g_poly_coeffs(alpha)

    def g(t: float) -> float:
        u = 2.0 + t * (c[0] + t * (c[1] + t * (c[2] + t * c[3])))
        du = sum(dcoef[k - 1] * t ** (k - alpha) for k in (1, 2, 3, 4)) if t > 0 else 0.0
        return du + u + u * u

    return g


def _make_f_case2(alpha: float):
    c, dcoef = _g_poly_coeffs(alpha)
    d1, d2, d3, d4 = dcoef

    @njit(cache=False)
    def f(u: float, t: float) -> float:
        ue = 2.0 + t * (1.0 + t * (0.5 + t * (1.0 / 3.0 + t * 0.25)))
        if t > 0.0:
            du = (d1 * t ** (1.0 - alpha) + d2 * t ** (2.0 - alpha)
                  + d3 * t ** (3.0 - alpha) + d4 * t ** (4.0 - alpha))
        else:
            du = 0.0
        g = du + ue + ue * ue
        return -u * u + g

    return f


@njit(cache=False)
def _f_case3(u: float, t: float) -> float:
    return u * (1.0 - u * u) + 2.0 * math.cos(_TWO_PI * t)


@dataclass(frozen=True)
class ScalarCase:
    """One scalar benchmark problem D^alpha u = -u + f(u, t)."""

    name: str
    u0: float
    kappa_default: float
    make_f: Callable[[float], Callable]
    df: Callable[[float, float], float] | None = None
    reference: Callable[[float, np.ndarray], np.ndarray] | None = None
    sigma_rule: str = "k_alpha"  # "k_alpha" -> sigma_k = k*alpha; "integer" -> sigma_k = k


CASE_I = ScalarCase(
    name="1.1",
    u0=3.0,
    kappa_default=2.0,
    make_f=lambda alpha: _f_case1,
    df=lambda u, t: -2.0,
    reference=lambda alpha, t: 3.0 * mittag_leffler_neg_t(alpha, 3.0, t),
    sigma_rule="k_alpha",
)

CASE_II = ScalarCase(
    name="1.2",
    u0=2.0,
    kappa_default=325.875,
    make_f=_make_f_case2,
    df=lambda u, t: -2.0 * u,
    reference=lambda alpha, t: case2_exact(t),
    sigma_rule="integer",
)

CASE_III = ScalarCase(
    name="1.3",
    u0=1.0,
    kappa_default=3.0,
    make_f=lambda alpha: _f_case3,
    df=lambda u, t: 1.0 - 3.0 * u * u,
    reference=None,
    sigma_rule="k_alpha",
)

_CASES = {"1.1": CASE_I, "1.2": CASE_II, "1.3": CASE_III}


def scalar_case(name: str) -> ScalarCase:
    try:
        return _CASES[name]
    except KeyError:
        raise ValueError(f"unknown scalar case {name!r}; choose from {sorted(_CASES)}") from None


def case_sigma(case: ScalarCase, alpha: float, m: int) -> tuple[float, ...]:
    if m == 0:
        return ()
    if case.sigma_rule == "integer":
        return tuple(float(k) for k in range(1, m + 1))
    return tuple(k * alpha for k in range(1, m + 1))


# --- PDE case ingredients -------------------------------------------------------


def pde_case1_terms(alpha1: float, alpha2: float, mu1: float, mu2: float):
    """Nonlinearities with manufactured forcing for PDE case 2.1.

    Returns (f, g, u_exact, v_exact); f and g take (U, V, X, Y, t) on the cell
    grid, the exact fields take (X, Y, t).
    """
    pi2 = math.pi * math.pi

    def e1(t: float) -> float:
        return float(mittag_leffler_neg_t(alpha1, 1.0, np.array([t]))[0])

    def e2(t: float) -> float:
        return float(mittag_leffler_neg_t(alpha2, 1.0, np.array([t]))[0])

    def shape(X, Y):
        return np.sin(math.pi * X) * np.sin(math.pi * Y)

    def u_exact(X, Y, t):
        return e1(t) * shape(X, Y)

    def v_exact(X, Y, t):
        return e2(t) * shape(X, Y)

    def f(U, V, X, Y, t):
        s = shape(X, Y)
        a, b = e1(t), e2(t)
        fhat = (-a + 2.0 * pi2 * mu1 * a) * s + b * a * a * s**3
        return -V * U * U + fhat

    def g(U, V, X, Y, t):
        s = shape(X, Y)
        a, b = e1(t), e2(t)
        ghat = (-b + 2.0 * pi2 * mu2 * b) * s + a * b * b * s**3
        return -V * V * U + ghat

    return f, g, u_exact, v_exact


def pde_case2_terms():
    """Nonlinearities and initial data for PDE case 2.2 (free decay)."""

    def f(U, V, X, Y, t):
        return -U * U * V

    def g(U, V, X, Y, t):
        return -V * V * U

    def u0(X, Y):
        return X * (1.0 - X) * Y * (1.0 - Y)

    def v0(X, Y):
        return np.sin(math.pi * X) * np.sin(math.pi * Y)

    return f, g, u0, v0
