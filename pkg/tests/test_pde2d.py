import math

import numpy as np
import pytest

from fastfode.odesolve import Backend
from fastfode.pde2d import (
    CoupledProblem,
    Grid2D,
    l2_error,
    laplacian_apply,
    laplacian_matrix,
    solve_coupled,
)
from fastfode.problems import pde_case1_terms, pde_case2_terms


class TestLaplacian:
    def test_zero_field(self):
        g = Grid2D(8)
        assert np.all(laplacian_apply(g, np.zeros((8, 8))) == 0.0)

    def test_sine_eigenfield(self):
        g = Grid2D(32)
        X, Y = g.meshgrid()
        s = np.sin(np.pi * X) * np.sin(np.pi * Y)
        lam = -(8.0 / g.h**2) * math.sin(math.pi * g.h / 2.0) ** 2
        assert np.max(np.abs(laplacian_apply(g, s) - lam * s)) < 1e-11 / g.h**2 * 1e-2
        assert lam == pytest.approx(-2.0 * math.pi**2, rel=5e-3)

    def test_symmetry(self):
        g = Grid2D(12)
        rng = np.random.default_rng(0)
        a = rng.normal(size=(12, 12))
        b = rng.normal(size=(12, 12))
        lhs = np.sum(laplacian_apply(g, a) * b)
        rhs = np.sum(a * laplacian_apply(g, b))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_negative_definite(self):
        g = Grid2D(8)
        eigs = np.linalg.eigvalsh(laplacian_matrix(g).toarray())
        assert np.max(eigs) < 0


def _zero_term(U, V, X, Y, t):
    return np.zeros_like(U)


class TestCoupledSolver:
    def test_zero_data_stays_zero(self):
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5)
        res = solve_coupled(prob, g, _zero_term, _zero_term,
                            np.zeros((8, 8)), np.zeros((8, 8)), tau=0.1, T=1.0)
        assert np.all(res.u == 0.0)
        assert np.all(res.v == 0.0)

    def test_symmetric_problem_gives_identical_fields(self):
        g = Grid2D(16)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5, kappa1=2.0, kappa2=2.0)
        f, gg, uex, vex = pde_case1_terms(0.5, 0.5, 1.0, 1.0)
        X, Y = g.meshgrid()
        u0 = uex(X, Y, 0.0)
        res = solve_coupled(prob, g, f, gg, u0, u0.copy(), tau=1 / 16, T=1.0)
        assert np.max(np.abs(res.u - res.v)) == 0.0

    def test_spatial_second_order_steady_state(self):
        # u = sin(pi x) sin(pi y) constant in time: the discrete solution sits
        # at the discrete equilibrium, whose distance to u is the pure O(h^2)
        # spatial error; h-halving must reduce it by ~4.
        errs = []
        for m in (8, 16, 32):
            g = Grid2D(m)
            X, Y = g.meshgrid()
            exact = np.sin(np.pi * X) * np.sin(np.pi * Y)

            def forcing(U, V, Xg, Yg, t):
                return 2.0 * math.pi**2 * np.sin(np.pi * Xg) * np.sin(np.pi * Yg)

            prob = CoupledProblem(alpha1=0.5, alpha2=0.5, kappa1=1.0, kappa2=1.0)
            res = solve_coupled(prob, g, forcing, forcing, exact, exact.copy(),
                                tau=1 / 8, T=3.0)
            errs.append(l2_error(g, res.u, exact))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)

    def test_factor_once(self):
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.4, alpha2=0.7)
        res = solve_coupled(prob, g, _zero_term, _zero_term,
                            np.ones((8, 8)), np.ones((8, 8)), tau=0.05, T=1.0)
        # Two fields x (semi step matrix + implicit start-up matrix).
        assert res.factor_count == 4
        res_i = solve_coupled(prob, g, _zero_term, _zero_term,
                              np.ones((8, 8)), np.ones((8, 8)), tau=0.05, T=1.0,
                              scheme="implicit")
        assert res_i.factor_count == 2

    def test_picard_forcing_only_converges_immediately(self):
        # With f independent of the fields the first Picard update is exact
        # and the second pass only verifies it.
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5)

        def forcing(U, V, X, Y, t):
            return np.ones_like(U)

        res = solve_coupled(prob, g, forcing, forcing, np.ones((8, 8)) * 0.5,
                            np.ones((8, 8)) * 0.5, tau=0.1, T=1.0, scheme="implicit")
        assert max(res.picard_iterations) <= 2

    def test_picard_contracts_on_field_coupling(self):
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5)

        def lin(U, V, X, Y, t):
            return -U

        res = solve_coupled(prob, g, lin, lin, np.ones((8, 8)) * 0.5,
                            np.ones((8, 8)) * 0.5, tau=0.1, T=1.0, scheme="implicit")
        assert max(res.picard_iterations) <= 30

    def test_fast_vs_direct_backend(self):
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.2, alpha2=0.8, kappa1=2.0, kappa2=2.0)
        f, gg, uex, vex = pde_case1_terms(0.2, 0.8, 1.0, 1.0)
        X, Y = g.meshgrid()
        u0, v0 = uex(X, Y, 0.0), vex(X, Y, 0.0)
        out = {}
        for kind in ("direct", "fast"):
            out[kind] = solve_coupled(prob, g, f, gg, u0, v0, tau=0.01, T=1.5,
                                      backend=Backend(kind=kind))
        for field in ("u", "v"):
            a = getattr(out["direct"], field)
            b = getattr(out["fast"], field)
            assert np.max(np.abs(a - b)) <= 1e-7 * max(1.0, np.max(np.abs(a)))

    def test_case2_decay(self):
        g = Grid2D(16)
        prob = CoupledProblem(alpha1=0.8, alpha2=0.2, kappa1=2.0, kappa2=2.0)
        f, gg, u0f, v0f = pde_case2_terms()
        X, Y = g.meshgrid()
        res = solve_coupled(prob, g, f, gg, u0f(X, Y), v0f(X, Y), tau=0.05, T=4.0,
                            snapshot_times=(1.0, 2.0, 4.0))
        sups = [np.max(np.abs(res.snapshots[t][0])) for t in (1.0, 2.0, 4.0)]
        assert sups[0] > sups[1] > sups[2] > 0

    def test_memory_growth_contrast(self):
        g = Grid2D(8)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5)
        peaks = {}
        for kind in ("direct", "fast"):
            per_n = []
            for n_t in (128, 256, 512):
                res = solve_coupled(prob, g, _zero_term, _zero_term,
                                    np.ones((8, 8)), np.ones((8, 8)),
                                    tau=1.0 / n_t, T=1.0, backend=Backend(kind=kind))
                per_n.append(res.peak_state_scalars)
            peaks[kind] = per_n
        d = peaks["direct"]
        f_ = peaks["fast"]
        assert d[2] / d[0] == pytest.approx(4.0, rel=0.1)  # linear in n_T
        assert f_[2] / f_[0] < 2.0  # logarithmic-ish

    def test_invalid_scheme_and_kappa(self):
        g = Grid2D(4)
        with pytest.raises(ValueError):
            CoupledProblem(alpha1=0.5, alpha2=0.5, kappa1=-1.0)
        prob = CoupledProblem(alpha1=0.5, alpha2=0.5)
        with pytest.raises(ValueError):
            solve_coupled(prob, g, _zero_term, _zero_term, np.zeros((4, 4)),
                          np.zeros((4, 4)), tau=0.1, T=0.5, scheme="bogus")
