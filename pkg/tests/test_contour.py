import math

import numpy as np
import pytest

from fastfode.contour import (
    ContourKind,
    hyperbolic_node_count,
    hyperbolic_quadrature,
    kernel_e,
    quadrature_to_csv,
    talbot_map,
    talbot_quadrature,
    transfer_function,
    weight_from_contour,
)
from fastfode.fracweights import Family, GeneratingFunction, convolution_weights


class TestTalbot:
    def test_map_at_half_pi(self):
        z = talbot_map(math.pi / 2, 32.0)
        assert z.real == pytest.approx(-15.4048, abs=1e-3)
        assert z.imag == pytest.approx(32 * 0.6443 * 0.5653 * math.pi / 2, abs=1e-3)

    def test_map_limit_at_zero(self):
        # theta*cot(theta) -> 1, so the vertex sits on the positive real axis.
        z = talbot_map(0.0, 10.0)
        assert z.imag == 0.0
        assert z.real == pytest.approx(10.0 * (-0.4814 + 0.6443))
        assert z.real > 0

    def test_conjugate_symmetry(self):
        quad = talbot_quadrature(16, 2.0)
        assert np.allclose(quad.nodes[::-1], np.conj(quad.nodes))
        assert np.allclose(quad.weights[::-1], -np.conj(quad.weights))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            talbot_quadrature(2, 1.0)
        with pytest.raises(ValueError):
            talbot_quadrature(16, 0.0)


class TestHyperbolic:
    def test_vertex_value(self):
        quad = hyperbolic_quadrature(8, T_level=8.0)  # mu = 2*8/(2*8) = 1
        lam_limit = 1.0 - math.sin(0.4 * math.pi)
        assert lam_limit == pytest.approx(0.048943, abs=1e-6)
        # nodes stay left of the contour vertex; the innermost is closest
        reals = quad.nodes.real
        assert np.all(reals <= lam_limit)
        assert np.argmax(reals) in (quad.N - 1, quad.N)

    def test_conjugate_symmetry(self):
        quad = hyperbolic_quadrature(12, 3.0)
        assert np.allclose(quad.nodes[::-1], np.conj(quad.nodes))

    def test_node_count_formula(self):
        assert hyperbolic_node_count(0.01, 0.5, 1e-10) == 26


class TestTransferFunction:
    def test_gngf_first_order_is_pure_power(self):
        gf = GeneratingFunction(Family.GNGF, 1, 0.3, 0.5)
        lam = 2.0 + 1.5j
        assert transfer_function(gf, lam) == pytest.approx(lam**0.3)

    def test_fbdf2_product_form(self):
        gf = GeneratingFunction(Family.FBDF, 2, 0.7, 0.1)
        lam = 1.0 - 2.0j
        expected = lam**0.7 * (1.0 + 0.1 * lam / 2.0) ** 0.7
        assert transfer_function(gf, lam) == pytest.approx(expected)

    def test_gngf2_plugin(self):
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, 1.0)
        assert transfer_function(gf, 1.0) == pytest.approx(1.25)


class TestKernel:
    def test_values(self):
        assert kernel_e(0, 0.0) == 1.0
        assert kernel_e(1, 0.5) == pytest.approx(4.0)

    def test_pole(self):
        with pytest.raises(ValueError):
            kernel_e(3, 1.0)


class TestWeightReconstruction:
    @pytest.mark.parametrize("family", [Family.GNGF, Family.FBDF])
    def test_window_accuracy_talbot(self, family):
        tau = 0.01
        gf = GeneratingFunction(family, 2, 0.5, tau)
        w = convolution_weights(gf, 300).omega
        quad = talbot_quadrature(32, 300 * tau)
        ns = np.arange(50, 301)
        what = weight_from_contour(gf, quad, ns)
        rel = np.abs(what - w[ns]) / np.abs(w[ns])
        assert np.max(rel) <= 1e-8

    def test_window_accuracy_hyperbolic(self):
        tau = 0.01
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, tau)
        w = convolution_weights(gf, 300).omega
        n_nodes = hyperbolic_node_count(tau, 0.5, 1e-10)
        quad = hyperbolic_quadrature(n_nodes, 300 * tau)
        ns = np.arange(50, 301)
        what = weight_from_contour(gf, quad, ns)
        assert np.max(np.abs(what - w[ns]) / np.abs(w[ns])) <= 1e-8

    def test_convergence_in_n_nodes(self):
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, 0.1)
        w = convolution_weights(gf, 40).omega
        errs = []
        for n_nodes in (4, 8, 16):
            quad = talbot_quadrature(n_nodes, 4.0)
            errs.append(abs(weight_from_contour(gf, quad, 8) - w[8]))
        assert errs[0] > errs[1] > errs[2]

    def test_halved_sum_identity(self):
        # Summing conjugate-symmetric node terms over either half agrees.
        gf = GeneratingFunction(Family.GNGF, 2, 0.4, 0.05)
        quad = talbot_quadrature(24, 2.0)
        n = 25
        f = transfer_function(gf, quad.nodes)
        terms = quad.weights * (1.0 - quad.nodes * gf.tau) ** (-1.0 - n) * f
        full = np.imag(np.sum(terms))
        half = np.imag(2.0 * np.sum(terms[quad.N :]))
        assert full == pytest.approx(half, rel=1e-12)

    def test_nodes_avoid_step_pole(self):
        tau = 0.01
        for maker, n_nodes in ((talbot_quadrature, 32), (hyperbolic_quadrature, 26)):
            quad = maker(n_nodes, 100 * tau)
            assert np.min(np.abs(1.0 - quad.nodes * tau)) > 1e-3


def test_quadrature_csv_dump(tmp_path):
    quad = talbot_quadrature(8, 1.0)
    path = tmp_path / "quad.csv"
    quadrature_to_csv(quad, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# kind=talbot,N=8")
    assert len(lines) == 2 + 16
