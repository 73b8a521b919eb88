import math

import numpy as np
import pytest

from fastfode.fracweights import (
    CorrectionSet,
    Family,
    GeneratingFunction,
    IllConditionedError,
    UnsupportedOrderError,
    build_correction_set,
    convolution_weights,
    correction_weights_E,
    discrete_caputo_direct,
    gamma_ratio,
    generating_series,
    gngf_coefficients,
    perturbation,
    starting_weight_table,
    starting_weights,
    weight_table_to_csv,
)


def series_sampling_oracle(gf: GeneratingFunction, n_max: int, radius: float = 0.95):
    """Coefficients by discrete Fourier sampling of the generating function."""
    m = 4 * (n_max + 1)
    z = radius * np.exp(2j * np.pi * np.arange(m) / m)
    coef = np.fft.fft(generating_series(gf, z)) / m
    return (coef[: n_max + 1] / radius ** np.arange(n_max + 1)).real


class TestGngfCoefficients:
    def test_printed_values_alpha_half(self):
        g = gngf_coefficients(0.5, 3)
        assert g[0] == 1.0
        assert g[1] == 0.25
        assert g[2] == pytest.approx(0.5**2 / 8 + 5 * 0.5 / 24, rel=1e-15)

    def test_first_order_is_one(self):
        assert gngf_coefficients(1.0, 1) == [1.0]

    def test_order_out_of_range(self):
        with pytest.raises(UnsupportedOrderError):
            gngf_coefficients(0.5, 7)
        with pytest.raises(UnsupportedOrderError):
            gngf_coefficients(0.5, 0)


class TestGeneratingFunction:
    def test_validation(self):
        with pytest.raises(ValueError):
            GeneratingFunction(Family.GNGF, 2, 0.0, 1.0)
        with pytest.raises(ValueError):
            GeneratingFunction(Family.GNGF, 2, 1.5, 1.0)
        with pytest.raises(ValueError):
            GeneratingFunction(Family.GNGF, 2, 0.5, 0.0)
        with pytest.raises(UnsupportedOrderError):
            GeneratingFunction(Family.GNGF, 7, 0.5, 1.0)

    def test_alpha_one_allowed(self):
        w = convolution_weights(GeneratingFunction(Family.GNGF, 2, 1.0, 1.0), 4).omega
        assert w[:3] == pytest.approx([1.5, -2.0, 0.5])  # classical BDF2


class TestConvolutionWeights:
    def test_fbdf1_binomial(self):
        t = convolution_weights(GeneratingFunction(Family.FBDF, 1, 0.5, 1.0), 6)
        assert t.omega[:3] == pytest.approx([1.0, -0.5, -0.125], abs=1e-15)
        n = np.arange(7)
        # (-1)^n binom(1/2, n) = C(2n, n) / (4^n (1 - 2n))
        exact = [math.comb(2 * k, k) / (4**k * (1 - 2 * k)) for k in n]
        assert t.omega == pytest.approx(exact, rel=1e-13)

    def test_gngf2_leading_weight(self):
        t = convolution_weights(GeneratingFunction(Family.GNGF, 2, 0.5, 1.0), 2)
        assert t.omega[0] == pytest.approx(1.25)

    def test_tau_scaling(self):
        gf1 = GeneratingFunction(Family.GNGF, 2, 0.4, 1.0)
        gf2 = GeneratingFunction(Family.GNGF, 2, 0.4, 0.1)
        w1 = convolution_weights(gf1, 50).omega
        w2 = convolution_weights(gf2, 50).omega
        assert w2 == pytest.approx(w1 * 0.1**-0.4, rel=1e-14)

    @pytest.mark.parametrize("family", [Family.FBDF, Family.GNGF])
    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5, 6])
    @pytest.mark.parametrize("alpha", [-0.3, 0.3, 0.5, 0.9])
    def test_series_sampling_oracle(self, family, p, alpha):
        # n_max limited to 128: at radius 0.95 the extraction noise grows like
        # eps * 0.95^(-n), so higher coefficients exceed the oracle's own
        # float64 validity (the acceptance suite re-checks n <= 1000 with a
        # radius balanced for that range).
        gf = GeneratingFunction(family, p, alpha, 0.1)
        w = convolution_weights(gf, 128).omega
        oracle = series_sampling_oracle(gf, 128)
        assert np.max(np.abs(w - oracle)) <= 1e-10 * np.max(np.abs(w))

    def test_families_agree_at_first_order(self):
        for alpha in (-0.5, 0.3, 0.9):
            a = convolution_weights(GeneratingFunction(Family.FBDF, 1, alpha, 1.0), 10**4)
            b = convolution_weights(GeneratingFunction(Family.GNGF, 1, alpha, 1.0), 10**4)
            assert np.max(np.abs(a.omega - b.omega)) < 1e-14 * np.max(np.abs(a.omega))

    @pytest.mark.parametrize("alpha,p", [(0.3, 1), (0.5, 2), (0.9, 2), (-0.5, 1)])
    def test_weight_decay_exponent(self, alpha, p):
        # |omega_n| ~ n^(-alpha-1): fitted slope within +-0.1, tail monotone.
        w = convolution_weights(GeneratingFunction(Family.GNGF, p, alpha, 1.0), 10**4).omega
        n = np.arange(100, 10**4 + 1)
        mag = np.abs(w[100:])
        slope = np.polyfit(np.log(n), np.log(mag), 1)[0]
        assert slope == pytest.approx(-alpha - 1.0, abs=0.1)
        assert np.all(np.diff(mag[10:]) < 0)


class TestStartingWeights:
    def test_single_exponent_closed_form(self):
        gf = GeneratingFunction(Family.GNGF, 1, 0.5, 1.0)
        w = starting_weights(gf, [0.5], 10)
        omega = convolution_weights(gf.with_tau(1.0), 10).omega
        expected = math.gamma(1.5) - sum(omega[10 - j] * j**0.5 for j in range(11))
        assert w[0] == pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("family", [Family.FBDF, Family.GNGF])
    def test_moment_conditions(self, family):
        alpha = 0.4
        sigma = np.array([alpha, 2 * alpha, 3 * alpha])
        gf = GeneratingFunction(family, 2, alpha, 1.0)
        table = starting_weight_table(gf, sigma, 400)
        omega = convolution_weights(gf, 400).omega
        j = np.arange(401, dtype=float)
        for r, s in enumerate(sigma):
            for n in (5, 40, 400):
                lhs = np.dot(omega[: n + 1][::-1], j[: n + 1] ** s)
                lhs += np.dot(table[n], (np.arange(1, 4)) ** s)
                rhs = gamma_ratio(s, alpha) * n ** (s - alpha)
                assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    def test_operator_exact_on_sigma_powers(self):
        # Defining property: the corrected operator maps t^sigma_r exactly.
        alpha, tau = 0.6, 0.05
        sigma = (alpha, 2 * alpha)
        gf = GeneratingFunction(Family.GNGF, 2, alpha, tau)
        corr = build_correction_set(gf.with_tau(1.0), sigma, n_max=500)
        t = np.arange(501) * tau
        for s in sigma:
            u = t**s
            scale = gamma_ratio(s, alpha)
            for n in (2, 17, 100, 500):
                val = discrete_caputo_direct(gf, corr, u, 0.0, n)
                assert val == pytest.approx(scale * t[n] ** (s - alpha), rel=1e-9)

    def test_ill_conditioned_sigma_raises(self):
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, 1.0)
        with pytest.raises(IllConditionedError) as exc:
            starting_weights(gf, [0.5, 0.5 + 1e-13], 20)
        assert exc.value.condition > 1e13

    def test_requires_positive_increasing(self):
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, 1.0)
        with pytest.raises(ValueError):
            starting_weights(gf, [0.5, 0.4], 20)
        with pytest.raises(ValueError):
            starting_weights(gf, [-0.5], 20)


class TestPerturbation:
    def test_second_difference_annihilates_constants(self):
        assert perturbation(2, (3.0, 3.0, 3.0)) == 0.0

    def test_second_difference_of_quadratic(self):
        for n in (5, 9):
            u = [(n - 2) ** 2, (n - 1) ** 2, n**2]
            assert perturbation(2, u) == pytest.approx(2.0)

    def test_first_difference(self):
        assert perturbation(1, (0.0, 1.0)) == 1.0

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            perturbation(3, (1.0, 2.0, 3.0, 4.0))


class TestCorrectionWeights:
    def test_linear_annihilated_by_q2(self):
        for n in (2, 5, 40):
            assert correction_weights_E(2, [1.0], n)[0] == pytest.approx(0.0, abs=1e-12)

    def test_single_exponent_values(self):
        w = correction_weights_E(2, [0.5], 5)
        assert w[0] == pytest.approx(5**0.5 - 2 * 4**0.5 + 3**0.5, abs=1e-13)
        w = correction_weights_E(1, [0.4], 4)
        assert w[0] == pytest.approx(4**0.4 - 3**0.4, abs=1e-13)

    def test_defining_property(self):
        # E_q^{n,m,sigma}(t^{sigma_r}) = 0 with the computed weights.
        sigma = np.array([0.3, 0.6, 1.2])
        for q in (1, 2):
            for n in (4, 9, 77):
                w = correction_weights_E(q, sigma, n)
                for s in sigma:
                    if q == 1:
                        e = n**s - (n - 1) ** s
                    else:
                        e = n**s - 2 * (n - 1) ** s + (n - 2) ** s
                    corr = np.dot(w, np.arange(1, 4, dtype=float) ** s)
                    assert e - corr == pytest.approx(0.0, abs=1e-10 * max(1, n**s))


class TestDiscreteCaputo:
    def test_constant_maps_to_zero(self):
        gf = GeneratingFunction(Family.GNGF, 2, 0.5, 0.1)
        u = np.full(51, 7.5)
        for n in (0, 3, 50):
            assert discrete_caputo_direct(gf, None, u, 7.5, n) == 0.0

    def test_power_alpha_gives_gamma(self):
        alpha, tau = 0.5, 0.02
        gf = GeneratingFunction(Family.GNGF, 2, alpha, tau)
        corr = build_correction_set(gf.with_tau(1.0), (alpha,), n_max=200)
        t = np.arange(201) * tau
        val = discrete_caputo_direct(gf, corr, t**alpha, 0.0, 150)
        assert val == pytest.approx(math.gamma(1 + alpha), rel=1e-10)


def test_weight_csv_header(tmp_path):
    gf = GeneratingFunction(Family.GNGF, 2, 0.5, 1.0)
    path = tmp_path / "w.csv"
    weight_table_to_csv(convolution_weights(gf, 3), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# family=gngf,p=2,alpha=0.5,tau=1.0"
    assert lines[1] == "n,omega_n"
    assert lines[2] == "0,1.25"
    assert len(lines) == 6
