"""Tests for supremum distributions at exponential and fixed horizons."""

import math

import numpy as np
import pytest

from src.distributions import (
    InversionParams,
    filon_cos_sin,
    residue_coefficients,
    sup_density_closed_sech,
    sup_density_closed_sinh_special,
    sup_density_expq,
    sup_density_fixed_t,
    sup_density_fixed_t_grid,
    sup_density_surface,
)
from src.errors import DomainError
from src.models import BetaFamilyModel
from src.roots import solve_real_q
from src.wh_factors import FactorProduct, p0_sech, phi_closed_sech


@pytest.fixture
def sech_law(sech):
    return sup_density_expq(sech, solve_real_q(sech, 1.0, 200), K=100)


class TestExponentialHorizon:
    def test_sech_series_matches_closed_form(self, sech_law):
        x = np.array([0.3, 0.5, 1.0, 2.0])
        np.testing.assert_allclose(sech_law.density(x), sup_density_closed_sech(0.25, 1.0, x), atol=1e-6)

    def test_sinh_special_point(self, sinh_special):
        law = sup_density_expq(sinh_special, solve_real_q(sinh_special, 4.0, 800), K=400)
        x = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
        np.testing.assert_allclose(law.density(x), sup_density_closed_sinh_special(4 * math.pi, x), rtol=1e-6)
        assert law.atom == 0.0

    @pytest.mark.parametrize("fixture", ["sech", "sinh"])
    @pytest.mark.parametrize("q", [0.5, 1.0, 5.0])
    def test_total_mass_is_one(self, request, fixture, q):
        model = request.getfixturevalue(fixture)
        law = sup_density_expq(model, solve_real_q(model, q, 200), K=40)
        assert law.total_mass() == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("x", [0.01, 0.1])
    def test_density_is_the_derivative_of_the_cdf(self, sinh, x):
        law = sup_density_expq(sinh, solve_real_q(sinh, 1.0, 200), K=40)
        h = 1e-6
        slope = (law.cdf(x + h) - law.cdf(x - h)) / (2 * h)
        assert slope == pytest.approx(law.density(x), rel=1e-6)

    @pytest.mark.parametrize("fixture", ["sech", "sinh", "beta"])
    def test_density_is_nonnegative(self, request, fixture):
        model = request.getfixturevalue(fixture)
        law = sup_density_expq(model, solve_real_q(model, 1.0, 200), K=40)
        assert np.all(law.density(np.linspace(0.05, 10.0, 1000)) >= 0)

    def test_log_density_decays_at_the_first_root(self, sinh):
        grid = solve_real_q(sinh, 1.0, 200)
        law = sup_density_expq(sinh, grid, K=40)
        x = np.linspace(5.0, 10.0, 21)
        slope = np.polyfit(x, np.log(law.density(x)), 1)[0]
        assert slope == pytest.approx(grid.zeta0_minus, rel=0.05)

    def test_without_positive_jumps_the_law_is_exponential(self):
        model = BetaFamilyModel(c1=0.0, c2=1.0, alpha1=1.0, alpha2=1.0, beta1=1.0, beta2=1.0,
                                lambda1=1.5, lambda2=1.5, sigma=1.0, mu=-0.1)
        grid = solve_real_q(model, 1.0, 20)
        law = sup_density_expq(model, grid, K=5)
        rate = -grid.zeta0_minus
        x = np.array([0.1, 1.0, 3.0])
        np.testing.assert_allclose(law.density(x), rate * np.exp(-rate * x), rtol=1e-12)
        assert law.atom == 0.0
        assert law.total_mass() == pytest.approx(1.0, abs=1e-14)

    def test_cdf_starts_at_atom_and_increases(self, sech_law):
        assert sech_law.cdf(0.0) == pytest.approx(p0_sech(0.25, 1.0), abs=1e-12)
        cdf = sech_law.cdf(np.linspace(0.05, 8.0, 60))
        assert np.all(np.diff(cdf) >= -1e-12)
        assert sech_law.survival(8.0) == pytest.approx(1.0 - cdf[-1])

    def test_mean_matches_factor_derivative(self, sech_law):
        h = 1e-4
        slope = (phi_closed_sech(0.25, 1.0, h) - phi_closed_sech(0.25, 1.0, -h)) / (2 * h)
        assert sech_law.mean() == pytest.approx(slope.imag, rel=1e-5)

    def test_rates_are_the_negative_roots(self, sinh):
        grid = solve_real_q(sinh, 1.0, 100)
        law = sup_density_expq(sinh, grid, K=20)
        np.testing.assert_allclose(law.rates[0], -grid.zeta0_minus)
        np.testing.assert_allclose(law.rates[1:], -grid.zeta_neg[:20])
        np.testing.assert_allclose(law.exponents, -law.rates)
        assert np.all(law.error_estimate(np.array([0.5, 2.0])) >= 0)

    def test_surface_rows_match_single_q(self, sinh):
        x = np.array([0.5, 1.0])
        surface = sup_density_surface(sinh, [0.5, 2.0], x, N=100, K=20)
        single = sup_density_expq(sinh, solve_real_q(sinh, 2.0, 100), K=20).density(x)
        assert surface.shape == (2, 2)
        np.testing.assert_allclose(surface[1], single)

    def test_rejects_small_grids(self, sinh):
        grid = solve_real_q(sinh, 1.0, 30)
        with pytest.raises(DomainError):
            sup_density_expq(sinh, grid, K=20)
        with pytest.raises(DomainError):
            sup_density_expq(sinh, grid, K=0)
        factor = FactorProduct.from_grid(sinh, grid, "plus")
        with pytest.raises(DomainError):
            residue_coefficients(factor, 31)

    def test_rejects_negative_x(self, sech_law):
        with pytest.raises(DomainError):
            sech_law.density(-0.1)


class TestClosedForms:
    def test_sech_closed_density_needs_positive_x(self):
        with pytest.raises(DomainError):
            sup_density_closed_sech(0.25, 1.0, 0.0)

    def test_sech_zero_q_needs_negative_alpha(self):
        with pytest.raises(DomainError):
            sup_density_closed_sech(0.25, 0.0, 1.0)

    def test_sinh_special_density_integrates_to_one(self):
        from scipy import integrate

        total, _ = integrate.quad(lambda x: sup_density_closed_sinh_special(4 * math.pi, x), 0, np.inf)
        assert total == pytest.approx(1.0, abs=1e-7)


class TestFilon:
    @pytest.mark.parametrize("t", [1.0, 3.0])
    def test_exponential_transform(self, t):
        h = 0.025
        u = np.arange(401) * h
        values = np.exp(-u)[:, None]
        cos_int, sin_int = filon_cos_sin(values, 0.0, h, t)
        exact = (1 - np.exp(-(1 - 1j * t) * 10.0)) / (1 - 1j * t)
        assert cos_int[0] == pytest.approx(exact.real, abs=1e-6)
        assert sin_int[0] == pytest.approx(exact.imag, abs=1e-6)

    def test_needs_odd_sample_count(self):
        with pytest.raises(DomainError):
            filon_cos_sin(np.ones((4, 1)), 0.0, 0.1, 1.0)


class TestFixedHorizon:
    def test_rejects_bad_arguments(self, sinh):
        with pytest.raises(DomainError):
            sup_density_fixed_t(sinh, -1.0, [1.0])
        with pytest.raises(DomainError):
            sup_density_fixed_t(sinh, 1.0, [0.0, 1.0])
        with pytest.raises(DomainError):
            sup_density_fixed_t(sinh, 1.0, [1.0], q0=-1.0)

    @pytest.mark.slow
    def test_laplace_transform_over_horizons(self, sech):
        q = 2.0
        x = np.array([0.5, 1.0, 2.0])
        nodes, weights = np.polynomial.legendre.leggauss(20)
        t = 3.5 * (nodes + 1.0)
        w = 3.5 * weights
        params = InversionParams(q0=0.5, envelope_tol=1e-7, imag_tol=1e-4, u_cap=4000.0)
        results = sup_density_fixed_t_grid(sech, t, x, params)
        p_t = np.array([r.values for r in results])
        mixed = (w * q * np.exp(-q * t)) @ p_t
        np.testing.assert_allclose(mixed, sup_density_closed_sech(0.25, q, x), rtol=0, atol=1e-4)

    @pytest.mark.slow
    def test_sinh_density_is_positive_and_decreasing(self, sinh):
        x = np.array([0.75, 1.0, 1.5])
        result = sup_density_fixed_t(sinh, 1.0, x, params=InversionParams(imag_tol=1e-5))
        assert np.all(result.values > 0)
        assert np.all(np.diff(result.values) < 0)
        assert result.imag_residual <= 1e-5
        assert result.q0 == pytest.approx(2.0)
        assert result.u_end <= 2000.0
