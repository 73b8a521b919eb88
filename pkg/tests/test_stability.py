import math

import numpy as np
import pytest

from fastfode.fracweights import Family
from fastfode.odesolve import Backend, InstabilityError, SchemeConfig, semi_implicit_solve
from fastfode.stability import (
    StabilityProblem,
    boundary_locus,
    is_stable_tau,
    region_raster,
    stability_interval,
    system_stability_check,
    unconditional_criterion,
)


class TestCriterion:
    def test_printed_threshold(self):
        assert unconditional_criterion(-1.0, -2.0, 2) == 1.25

    def test_equal_coefficients_first_order(self):
        assert unconditional_criterion(-1.0, -1.0, 1) == 0.0

    def test_zero_rho(self):
        assert unconditional_criterion(-1.0, 0.0, 2) == -0.25

    def test_preconditions(self):
        with pytest.raises(ValueError):
            unconditional_criterion(1.0, -1.0, 2)
        with pytest.raises(ValueError):
            unconditional_criterion(-1.0, -1.0, 3)


class TestBoundaryLocus:
    def test_passes_through_zero_at_z_one(self):
        loc = boundary_locus(StabilityProblem(alpha=0.5), 256)
        assert loc[0] == 0.0  # z = exp(0i) = 1 kills the numerator

    def test_above_threshold_never_positive_real(self):
        for alpha in (0.1, 0.5, 0.99):
            prob = StabilityProblem(alpha=alpha, kappa=1.3)
            for radius in (0.25, 0.5, 0.75, 1.0):
                vals = boundary_locus(prob, 20000, radius=radius)
                vals = vals[~np.isnan(vals)]
                scale = np.abs(vals)
                pos = (np.abs(vals.imag) < 1e-12 * scale) & (vals.real > 1e-12 * scale)
                assert not pos.any()

    def test_just_below_threshold_hits_positive_axis(self):
        prob = StabilityProblem(alpha=0.5, kappa=1.24)
        vals = boundary_locus(prob, 200000)
        vals = vals[~np.isnan(vals)]
        near_axis = np.abs(vals.imag) < 1e-4 * np.abs(vals)
        assert np.any(vals.real[near_axis] > 0)


class TestStabilityInterval:
    @pytest.mark.parametrize("alpha,kappa,ref", [
        (0.5, 0.0, 1.80e-1),
        (0.2, 1.0, 4.98e0),
        (0.9, 0.0, 6.83e-1),
    ])
    def test_printed_cells(self, alpha, kappa, ref):
        tau_star = stability_interval(StabilityProblem(alpha=alpha, kappa=kappa))
        assert tau_star == pytest.approx(ref, rel=0.05)

    def test_unbounded_at_threshold(self):
        for alpha in (0.2, 0.9):
            assert stability_interval(StabilityProblem(alpha=alpha, kappa=1.25)) == math.inf

    def test_scale_covariance(self):
        # (lam, rho, kappa) -> c*(...) multiplies the tau^alpha threshold by 1/c.
        alpha = 0.5
        base = stability_interval(StabilityProblem(alpha=alpha, lam=-1, rho=-2, kappa=0.5))
        scaled = stability_interval(
            StabilityProblem(alpha=alpha, lam=-3, rho=-6, kappa=1.5))
        assert scaled**alpha == pytest.approx(base**alpha / 3.0, rel=0.03)

    def test_predicate_brackets(self):
        prob = StabilityProblem(alpha=0.5, kappa=0.0)
        assert is_stable_tau(prob, 0.9 * 1.80e-1)
        assert not is_stable_tau(prob, 1.1 * 1.80e-1)


class TestEmpiricalRealization:
    def test_scheme_matches_predicted_interval(self):
        # Model problem f = rho*u stepped with the actual solver.
        alpha = 0.5
        prob = StabilityProblem(alpha=alpha, kappa=0.5)
        tau_star = stability_interval(prob)

        def run(tau):
            cfg = SchemeConfig(alpha=alpha, q=2, lam=-1.0, kappa=0.5,
                               tau=tau, T=10000 * tau, backend=Backend(kind="fast"),
                               divergence_factor=1e3)
            return semi_implicit_solve(cfg, lambda u, t: -2.0 * u, 1.0,
                                       df=lambda u, t: -2.0)

        traj = run(0.9 * tau_star)
        assert np.max(np.abs(traj.values)) < 1e3
        with pytest.raises(InstabilityError):
            run(1.1 * tau_star)


class TestSystemCheck:
    def test_dimension_one_reduces_to_scalar(self):
        prob = StabilityProblem(alpha=0.5, kappa=0.0)
        for tau in (0.5 * 1.80e-1, 2.0 * 1.80e-1):
            scalar = is_stable_tau(prob, tau)
            matrix = system_stability_check(
                np.array([[-1.0]]), np.array([[-2.0]]), np.array([[0.0]]),
                [0.5], tau)
            assert scalar == matrix

    def test_diagonal_above_threshold_stable_everywhere(self):
        A = np.diag([-1.0, -1.0])
        B = np.diag([-2.0, -2.0])
        K = 1.25 * np.eye(2)
        for tau in (0.1, 1.0, 10.0, 1000.0):
            assert system_stability_check(A, B, K, [0.5, 0.5], tau)

    def test_kappa_monotonically_enlarges_stable_range(self):
        A = np.diag([-1.0, -1.0])
        B = np.diag([-2.0, -2.0])
        alphas = [0.5, 0.5]

        def tau_star_system(kappa):
            lo, hi = 1e-4, 1e4
            for _ in range(40):
                mid = math.sqrt(lo * hi)
                if system_stability_check(A, B, kappa * np.eye(2), alphas, mid):
                    lo = mid
                else:
                    hi = mid
            return lo

        stars = [tau_star_system(k) for k in (0.0, 0.5, 2.0)]
        assert stars[0] < stars[1]
        assert stars[2] == pytest.approx(1e4, rel=0.1)  # above threshold: unbounded

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            system_stability_check(np.eye(2), np.eye(2), np.eye(3), [0.5, 0.5], 0.1)
        with pytest.raises(ValueError):
            system_stability_check(-np.eye(2), -np.eye(2), np.eye(2), [0.5], 0.1)


class TestRegionRaster:
    def test_negative_axis_inside_region_above_threshold(self):
        # theta = 0.63 > (1 + 3*gamma)/(4*gamma) at gamma = 2 -> kappa above
        # threshold, so the whole negative real axis must be stable.
        re = np.linspace(-8.0, -0.05, 40)
        im = np.array([0.0])
        stable = region_raster(Family.GNGF, 2, 0.5, 2, gamma=2.0, theta_param=0.63,
                               re_grid=re, im_grid=im)
        assert stable.shape == (1, 40)
        assert np.all(stable == 1)

    def test_below_threshold_axis_partially_unstable(self):
        re = np.linspace(-8.0, -0.05, 60)
        im = np.array([0.0])
        stable = region_raster(Family.GNGF, 2, 0.5, 2, gamma=2.0, theta_param=0.5,
                               re_grid=re, im_grid=im)
        assert stable.min() == 0
        assert stable.max() == 1

    def test_region_grows_with_theta(self):
        re = np.linspace(-6.0, 1.0, 30)
        im = np.linspace(-3.0, 3.0, 30)
        areas = []
        for theta in (0.5, 0.63, 0.8):
            stable = region_raster(Family.GNGF, 2, 0.3, 2, gamma=2.0,
                                   theta_param=theta, re_grid=re, im_grid=im)
            areas.append(stable.sum())
        assert areas[0] < areas[1] <= areas[2]
