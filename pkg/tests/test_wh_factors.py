"""Tests for the Wiener-Hopf factor products and their closed forms."""

import math

import numpy as np
import pytest
from scipy import special

from src.errors import DomainError, PoleError
from src.models import BetaFamilyModel, SechPoissonModel
from src.roots import half_line_roots, positive_strands, solve_real_q
from src.wh_factors import (
    FactorProduct,
    accelerate_tail,
    atom_probability,
    f_euler_maclaurin,
    p0_sech,
    phi_closed_sech,
    phi_closed_sinh_special,
    special_point_eta,
)

REAL_Z = np.array([-2.0, -0.5, 0.3, 1.5])
WIDE_Z = np.linspace(-5.0, 5.0, 50)
UPPER_Z = (np.linspace(-3.0, 3.0, 5)[:, None] + 1j * np.array([0.0, 0.5, 1.0, 2.5])[None, :]).ravel()


class TestEulerMaclaurin:
    def test_equal_shifts_match_trigamma(self):
        value = f_euler_maclaurin(1, 1, 0.3, 0.3, 200)
        assert value.real == pytest.approx(special.polygamma(1, 200.3), rel=1e-12)
        assert abs(value.imag) < 1e-15

    def test_cubic_sum(self):
        value = f_euler_maclaurin(2, 1, 0.5, 0.5, 200)
        assert value.real == pytest.approx(-special.polygamma(2, 200.5) / 2, rel=1e-12)

    def test_wide_shift_uses_direct_terms(self):
        value = f_euler_maclaurin(1, 1, 0.5, 150.5, 200)
        expected = (special.digamma(350.5) - special.digamma(200.5)) / 150
        assert value.real == pytest.approx(expected, rel=1e-12)

    def test_vectorized_over_second_shift(self):
        z2 = np.array([0.3, 1.3, 2.3])
        values = f_euler_maclaurin(1, 1, 0.3, z2, 100)
        assert values.shape == (3,)
        assert values[0].real == pytest.approx(special.polygamma(1, 100.3), rel=1e-12)

    @pytest.mark.parametrize("shift", [0.25, 0.5, 0.9])
    def test_square_sum_at_moderate_start(self, shift):
        value = f_euler_maclaurin(1, 1, shift, shift, 50)
        assert value.real == pytest.approx(special.zeta(2, 50 + shift), rel=1e-12)

    def test_rejects_divergent_sums(self):
        with pytest.raises(DomainError):
            f_euler_maclaurin(0.5, 0.5, 0.1, 0.1, 100)
        with pytest.raises(DomainError):
            f_euler_maclaurin(1, 1, 0.1, 0.1, 5)


class TestAccelerateTail:
    def test_identity_at_zero(self):
        assert accelerate_tail(50, 0.0, 0.5, 0.1, 0.3) == pytest.approx(1.0, abs=1e-12)

    def test_matches_long_product(self):
        N, z, A1, A2, shift = 50, 2.0, 0.5, 0.1, 0.3
        n = np.arange(N, 2_000_000, dtype=float)
        v = n + shift
        zeta = v + A1 / v + A2 / v**2
        brute = math.exp(float(np.sum(np.log1p(z / v) - np.log1p(z / zeta))))
        assert accelerate_tail(N, z, A1, A2, shift).real == pytest.approx(brute, abs=1e-8)

    def test_needs_large_start(self):
        with pytest.raises(DomainError):
            accelerate_tail(5, 1.0, 0.5, 0.1, 0.3)


class TestSechClosedForm:
    def test_p0_special_value(self):
        assert p0_sech(0.0, math.pi) == pytest.approx(math.sqrt(2) / 2, rel=1e-12)

    @pytest.mark.parametrize("side", ["plus", "minus"])
    def test_factor_is_one_at_origin(self, side):
        assert phi_closed_sech(0.25, 1.0, 0.0, side) == pytest.approx(1.0, abs=1e-13)

    def test_factorization_identity(self, sech):
        q = 1.0
        product = phi_closed_sech(0.25, q, REAL_Z, "plus") * phi_closed_sech(0.25, q, REAL_Z, "minus")
        np.testing.assert_allclose(product, q / (q + sech.psi(REAL_Z)), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("side", ["plus", "minus"])
    def test_product_matches_closed_form(self, sech, side):
        q = 1.0
        side_model = sech if side == "minus" else sech.mirror()
        r0, roots = half_line_roots(side_model, q, 200)
        factor = FactorProduct.from_roots(sech, q, side, r0, roots)
        z = np.array([-3.0, -0.5, 0.7, 2.5])
        np.testing.assert_allclose(factor(z), phi_closed_sech(0.25, q, z, side), atol=1e-8)

    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.25])
    @pytest.mark.parametrize("q", [0.5, 1.0, 4.0])
    def test_product_matches_closed_form_in_upper_half_plane(self, alpha, q):
        model = SechPoissonModel(alpha=alpha)
        r0, roots = half_line_roots(model.mirror(), q, 200)
        factor = FactorProduct.from_roots(model, q, "plus", r0, roots)
        np.testing.assert_allclose(factor(UPPER_Z), phi_closed_sech(alpha, q, UPPER_Z, "plus"), rtol=1e-8)

    @pytest.mark.parametrize("alpha", [-0.5, 0.25])
    def test_minus_side_is_the_plus_side_of_the_reflection(self, alpha):
        q = 1.0
        minus = phi_closed_sech(alpha, q, UPPER_Z, "minus")
        np.testing.assert_allclose(minus, phi_closed_sech(-alpha, q, -UPPER_Z, "plus"), rtol=1e-13)
        model = SechPoissonModel(alpha=alpha)
        product = FactorProduct.build(model, q, "minus", use_closed_form=False)
        reflected = FactorProduct.build(SechPoissonModel(alpha=-alpha), q, "plus", use_closed_form=False)
        np.testing.assert_allclose(product(REAL_Z), reflected(-REAL_Z), rtol=1e-10)

    def test_build_defaults_to_closed_form(self, sech):
        factor = FactorProduct.build(sech, 1.0, "plus")
        assert factor.closed_form
        assert factor(0.7) == pytest.approx(phi_closed_sech(0.25, 1.0, 0.7, "plus"))

    def test_minus_side_degenerates_at_zero_q(self, sech_negative_mean):
        with pytest.raises(DomainError):
            FactorProduct.build(sech_negative_mean, 0.0, "minus")
        with pytest.raises(DomainError):
            phi_closed_sech(-0.25, 0.0, 0.5, "minus")

    def test_rejects_unknown_side(self, sech):
        with pytest.raises(DomainError):
            FactorProduct.build(sech, 1.0, "upper")


class TestProducts:
    def test_sinh_factorization_identity(self, sinh):
        q = 1.0
        grid = solve_real_q(sinh, q, 400)
        plus = FactorProduct.from_grid(sinh, grid, "plus")
        minus = FactorProduct.from_grid(sinh, grid, "minus")
        expected = q / (q + sinh.psi(REAL_Z))
        np.testing.assert_allclose(plus(REAL_Z) * minus(REAL_Z), expected, atol=1e-6)

    def test_sinh_special_point_closed_form(self, sinh_special):
        assert special_point_eta(4 * math.pi) == pytest.approx(0.25)
        grid = solve_real_q(sinh_special, 4.0, 400)
        plus = FactorProduct.from_grid(sinh_special, grid, "plus")
        np.testing.assert_allclose(plus(REAL_Z), phi_closed_sinh_special(4 * math.pi, REAL_Z), atol=1e-6)

    def test_acceleration_beats_plain_truncation(self, sinh):
        q, z = 1.0, np.array([-1.5, 0.7, 2.0])
        mirror = sinh.mirror()
        r0, roots = half_line_roots(mirror, q, 800)
        reference = FactorProduct.from_roots(sinh, q, "plus", r0, roots)(z)
        r0, roots = half_line_roots(mirror, q, 200)
        fast = FactorProduct.from_roots(sinh, q, "plus", r0, roots)(z)
        plain = FactorProduct.from_roots(sinh, q, "plus", r0, roots, accelerate=False)(z)
        fast_error = np.max(np.abs(fast - reference))
        assert fast_error < 1e-6
        assert np.max(np.abs(plain - reference)) > 100 * fast_error

    def test_value_at_origin_and_bound(self, beta):
        grid = solve_real_q(beta, 1.0, 200)
        plus = FactorProduct.from_grid(beta, grid, "plus")
        minus = FactorProduct.from_grid(beta, grid, "minus")
        assert plus(0.0) == pytest.approx(1.0, abs=1e-12)
        assert minus(0.0) == pytest.approx(1.0, abs=1e-12)
        upper = np.array([0.5 + 0.1j, -2.0 + 1.0j, 3.0 + 0.5j, 4.0j])
        assert np.all(np.abs(plus(upper)) <= 1 + 1e-9)

    @pytest.mark.parametrize("fixture", ["sech", "sinh", "beta"])
    @pytest.mark.parametrize("q", [0.5, 1.0, 5.0])
    def test_factorization_identity_on_the_real_line(self, request, fixture, q):
        model = request.getfixturevalue(fixture)
        plus = FactorProduct.build(model, q, "plus", use_closed_form=False)
        minus = FactorProduct.build(model, q, "minus", use_closed_form=False)
        expected = q / (q + model.psi(WIDE_Z))
        np.testing.assert_allclose(plus(WIDE_Z) * minus(WIDE_Z), expected, rtol=1e-7)

    def test_sinh_special_point_to_full_accuracy(self, sinh_special):
        plus = FactorProduct.build(sinh_special, 4.0, "plus")
        np.testing.assert_allclose(plus(UPPER_Z), phi_closed_sinh_special(4 * math.pi, UPPER_Z), rtol=1e-8)

    @pytest.mark.parametrize("fixture", ["sinh", "beta"])
    @pytest.mark.parametrize("side", ["plus", "minus"])
    def test_hermitian_symmetry(self, request, fixture, side):
        model = request.getfixturevalue(fixture)
        grid = solve_real_q(model, 1.0, 200)
        factor = FactorProduct.from_grid(model, grid, side)
        np.testing.assert_allclose(factor(-WIDE_Z), np.conj(factor(WIDE_Z)), rtol=1e-13, atol=1e-15)

    def test_strands_stay_analytic_by_default(self, sinh):
        r0, roots = half_line_roots(sinh.mirror(), 1.0, 200)
        analytic = tuple(positive_strands(sinh.mirror(), 1.0))
        assert FactorProduct.from_roots(sinh, 1.0, "plus", r0, roots).strands == analytic
        fitted = FactorProduct.from_roots(sinh, 1.0, "plus", r0, roots, calibrate=True).strands
        assert [len(s.corrections) for s in fitted] == [len(s.corrections) + 1 for s in analytic]

    @pytest.mark.slow
    def test_accelerated_product_matches_long_naive_product(self, sinh):
        q = 1.0
        z = np.concatenate(([1.0 + 0.5j], np.linspace(-4.0, 4.0, 9) + 0.25j))
        mirror = sinh.mirror()
        r0, roots = half_line_roots(mirror, q, 1_000_000)
        naive = FactorProduct.from_roots(sinh, q, "plus", r0, roots, accelerate=False)
        reference = np.array([naive(v) for v in z])
        built = FactorProduct.build(sinh, q, "plus")
        np.testing.assert_allclose(built(z), reference, rtol=1e-8)

        r0, roots = half_line_roots(mirror, q, 50)
        fast = FactorProduct.from_roots(sinh, q, "plus", r0, roots)(z)
        plain = FactorProduct.from_roots(sinh, q, "plus", r0, roots, accelerate=False)(z)
        assert np.max(np.abs(plain - reference)) > 100 * np.max(np.abs(fast - reference))

    def test_one_sided_beta_factors(self):
        model = BetaFamilyModel(c1=1.0, c2=0.0, alpha1=1.0, alpha2=1.0, beta1=1.0, beta2=1.0,
                                lambda1=1.5, lambda2=1.5, sigma=1.0, mu=0.1)
        q = 1.0
        grid = solve_real_q(model, q, 200)
        minus = FactorProduct.from_grid(model, grid, "minus")
        assert minus.N == 0 and minus.strands == ()
        np.testing.assert_allclose(minus(WIDE_Z), 1.0 / (1.0 + 1j * WIDE_Z / grid.zeta0_plus), rtol=1e-13)
        plus = FactorProduct.build(model, q, "plus")
        np.testing.assert_allclose(plus(WIDE_Z) * minus(WIDE_Z), q / (q + model.psi(WIDE_Z)), rtol=1e-7)

    def test_pole_raises(self, sinh):
        grid = solve_real_q(sinh, 1.0, 50)
        minus = FactorProduct.from_grid(sinh, grid, "minus")
        with pytest.raises(PoleError):
            minus(1j * minus.roots[0])


class TestAtom:
    def test_bounded_variation_atom_is_the_laplace_limit(self, beta_bounded_variation):
        model = beta_bounded_variation
        grid = solve_real_q(model, 1.0, 200)
        atom = atom_probability(model, grid)
        assert 0 < atom < 1
        plus = FactorProduct.from_grid(model, grid, "plus")
        values = np.real(plus(1j * np.array([10.0, 100.0, 1000.0])))
        assert np.all(np.diff(values) < 0)
        assert values[-1] > atom - 1e-8

    def test_no_atom_with_gaussian_part(self, sinh):
        grid = solve_real_q(sinh, 1.0, 20)
        assert atom_probability(sinh, grid) == 0.0

    def test_sech_atom_is_closed_form(self, sech):
        grid = solve_real_q(sech, 1.0, 20)
        assert atom_probability(sech, grid) == pytest.approx(p0_sech(0.25, 1.0))
