"""Linear stability tooling: boundary loci, stability intervals, criteria.

The model problem is D^alpha u = (lambda + rho) u stepped with the perturbed
semi-implicit scheme; a step size tau is stable iff

    Q(z) = omega(p, alpha, 1, z) - tau^alpha [(lambda + rho) - (rho + kappa)(1 - z)^q]

has no zero in |z| <= 1, tested via the argument principle on the boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fracweights import Family, GeneratingFunction, generating_series

__all__ = [
    "StabilityProblem",
    "boundary_locus",
    "is_stable_tau",
    "stability_interval",
    "unconditional_criterion",
    "system_stability_check",
    "region_raster",
]

_TAU_UNBOUNDED = 1e18
_TAU_FLOOR = 1e-18


@dataclass(frozen=True)
class StabilityProblem:
    """Scheme + model-problem coefficients for scalar stability analysis."""

    family: Family = Family.GNGF
    p: int = 2
    alpha: float = 0.5
    q: int = 2
    lam: complex = -1.0
    rho: complex = -2.0
    kappa: complex = 0.0

    def __post_init__(self) -> None:
        if self.q not in (1, 2):
            raise ValueError("perturbation order q must be 1 or 2")

    @property
    def gf(self) -> GeneratingFunction:
        return GeneratingFunction(self.family, self.p, self.alpha, 1.0)


def _locus_parts(prob: StabilityProblem, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = generating_series(prob.gf, z)
    den = (prob.lam + prob.rho) - (prob.rho + prob.kappa) * (1.0 - z) ** prob.q
    return np.asarray(num), np.asarray(den)


def boundary_locus(prob: StabilityProblem, z_samples: int = 4096, radius: float = 1.0):
    """Values of omega(z)/denominator on |z| = radius; poles returned as nan.

    The returned values are the xi^alpha locus; map through value**(1/alpha)
    for the xi plane.
    """
    theta = 2.0 * math.pi * np.arange(z_samples) / z_samples
    z = radius * np.exp(1j * theta)
    num, den = _locus_parts(prob, z)
    out = np.full(z_samples, np.nan + 0j)
    scale = np.max(np.abs(den)) + np.max(np.abs(num))
    ok = np.abs(den) > 1e-14 * scale
    out[ok] = num[ok] / den[ok]
    return out


def _winding_of(values: np.ndarray) -> tuple[int, float]:
    """Winding number around 0 of a closed sampled curve, plus max phase jump."""
    ang = np.angle(values)
    d = np.diff(ang, append=ang[:1])
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return round(float(np.sum(d) / (2.0 * math.pi))), float(np.max(np.abs(d)))


def is_stable_tau(prob: StabilityProblem, tau: float, z_samples: int = 8192) -> bool:
    """True iff Q(z) has no zero in the closed unit disk (argument principle)."""
    ta = tau**prob.alpha
    samples = z_samples
    while True:
        theta = 2.0 * math.pi * np.arange(samples) / samples
        z = np.exp(1j * theta)
        num, den = _locus_parts(prob, z)
        q = num - ta * den
        # Pointwise scale: a genuine boundary zero has |q| tiny against both
        # locus parts there, while a mere denominator zero leaves |q| = |num|.
        scale = np.abs(num) + abs(ta) * np.abs(den)
        if np.min(np.abs(q) / np.maximum(scale, 1e-300)) < 1e-9:
            return False
        winding, jump = _winding_of(q)
        if jump < 0.5 * math.pi or samples >= 2**21:
            return winding == 0
        samples *= 4


def stability_interval(
    prob: StabilityProblem,
    tau_hi: float = _TAU_UNBOUNDED,
    tol: float = 0.01,
    z_samples: int = 8192,
) -> float:
    """Largest stable step tau* (bisection in log tau); math.inf if unbounded.

    Assumes the stable set is an interval (0, tau*); both bracket ends are
    re-verified after the search and a non-monotone predicate triggers a
    warning with the conservative (lower) endpoint returned.
    """
    if not (np.real(prob.lam) < 0):
        raise ValueError("interval search expects Re(lambda) < 0")
    if is_stable_tau(prob, tau_hi, z_samples):
        return math.inf
    lo = None
    tau = min(1.0, tau_hi)
    while tau >= _TAU_FLOOR:
        if is_stable_tau(prob, tau, z_samples):
            lo = tau
            break
        tau /= 10.0
    if lo is None:
        warnings.warn("no stable tau found above the search floor", stacklevel=2)
        return 0.0
    hi = lo * 10.0
    while hi < tau_hi and is_stable_tau(prob, hi, z_samples):
        lo = hi
        hi *= 10.0
    while hi / lo > 1.0 + tol:
        mid = math.sqrt(lo * hi)
        if is_stable_tau(prob, mid, z_samples):
            lo = mid
        else:
            hi = mid
    if not is_stable_tau(prob, lo, z_samples) or is_stable_tau(prob, hi, z_samples):
        warnings.warn("stability predicate not monotone at the bracket", stacklevel=2)
    return lo


def unconditional_criterion(lam: float, rho: float, q: int) -> float:
    """Theorem threshold on kappa for unconditional stability (p = 1, 2)."""
    if not lam < 0 or not rho <= 0:
        raise ValueError("criterion requires lambda < 0 and rho <= 0")
    if q == 1:
        return (lam - rho) / 2.0
    if q == 2:
        return (lam - 3.0 * rho) / 4.0
    raise ValueError("perturbation order q must be 1 or 2")


def system_stability_check(
    A: np.ndarray,
    B_lin: np.ndarray,
    kappa: np.ndarray,
    alphas,
    tau: float,
    family: Family = Family.GNGF,
    p: int = 2,
    q: int = 2,
    z_samples: int = 4096,
) -> bool:
    """Determinant criterion for the coupled scheme at step size tau.

    det(diag(omega_i(z)) - diag(tau^alpha_i)[(A+B) - (B+kappa)(1-z)^q]) must
    stay away from zero for |z| <= 1; checked on the boundary plus interior
    radii, with local grid refinement near the minimum.
    """
    A = np.asarray(A, dtype=complex)
    B_lin = np.asarray(B_lin, dtype=complex)
    kappa = np.asarray(kappa, dtype=complex)
    alphas = np.asarray(alphas, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d) or B_lin.shape != (d, d) or kappa.shape != (d, d):
        raise ValueError("system matrices must be square and equally sized")
    if alphas.shape != (d,):
        raise ValueError("need one fractional order per component")
    tau_a = tau**alphas

    def dets(z: np.ndarray) -> np.ndarray:
        mats = np.zeros(z.shape + (d, d), dtype=complex)
        zq = (1.0 - z) ** q
        for i in range(d):
            gf = GeneratingFunction(family, p, alphas[i], 1.0)
            omega_i = generating_series(gf, z)
            mats[..., i, :] = -tau_a[i] * ((A[i] + B_lin[i]) - (B_lin[i] + kappa[i]) * zq[..., None])
            mats[..., i, i] += omega_i
        return np.linalg.det(mats)

    norm_scale = (
        np.max(np.abs(np.linalg.eigvals(A + B_lin)))
        + np.max(np.abs(np.linalg.eigvals(B_lin + kappa)))
        + 1.0
    )
    floor = 1e-9 * (1.0 + float(np.max(tau_a)) * norm_scale) ** d

    for radius in (1.0, 0.75, 0.5, 0.25):
        theta = 2.0 * math.pi * np.arange(z_samples) / z_samples
        vals = dets(radius * np.exp(1j * theta))
        k = int(np.argmin(np.abs(vals)))
        fine = theta[k] + np.linspace(-1.0, 1.0, 256) * (2.0 * math.pi / z_samples)
        vals_fine = dets(radius * np.exp(1j * fine))
        if min(np.min(np.abs(vals)), np.min(np.abs(vals_fine))) < floor:
            return False
        if radius == 1.0:
            winding, jump = _winding_of(vals)
            if jump < 0.5 * math.pi and winding != 0:
                return False
    return True


def region_raster(
    family: Family,
    p: int,
    alpha: float,
    q: int,
    gamma: float,
    theta_param: float,
    re_grid: np.ndarray,
    im_grid: np.ndarray,
    z_samples: int = 2048,
) -> np.ndarray:
    """Stability indicator over a xi = tau^alpha * lambda grid.

    Uses the (gamma, theta) parametrization rho = gamma*lambda,
    kappa = -theta*rho: xi is stable iff
    omega(z) - xi[(1+gamma) - gamma(1-theta)(1-z)^q] has no zero in the disk.
    """
    gf = GeneratingFunction(family, p, alpha, 1.0)
    xi = (np.asarray(re_grid)[None, :] + 1j * np.asarray(im_grid)[:, None]).ravel()
    thetas = 2.0 * math.pi * np.arange(z_samples) / z_samples
    z = np.exp(1j * thetas)
    num = generating_series(gf, z)
    den = (1.0 + gamma) - gamma * (1.0 - theta_param) * (1.0 - z) ** q
    prev = None
    accum = np.zeros(xi.size)
    min_abs = np.full(xi.size, np.inf)
    for s in range(z_samples):
        vals = num[s] - xi * den[s]
        np.minimum(min_abs, np.abs(vals), out=min_abs)
        ang = np.angle(vals)
        if prev is not None:
            d = (ang - prev + math.pi) % (2.0 * math.pi) - math.pi
            accum += d
        else:
            first = ang
        prev = ang
    accum += (first - prev + math.pi) % (2.0 * math.pi) - math.pi
    winding = np.rint(accum / (2.0 * math.pi))
    scale = np.max(np.abs(num)) + np.abs(xi) * np.max(np.abs(den))
    stable = (winding == 0) & (min_abs > 1e-9 * scale)
    return stable.astype(int).reshape(len(np.asarray(im_grid)), len(np.asarray(re_grid)))
