"""Tests for the process families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import DomainError, PoleError
from src.models import (
    BetaFamilyModel,
    SechPoissonModel,
    SinhSquareModel,
    build_model,
    mirror,
    pole_lattice,
    psi,
    psi_lk_quadrature,
)

MODEL_FIXTURES = ["sech", "sinh", "sinh_special", "beta", "beta_bounded_variation"]


@pytest.fixture(params=MODEL_FIXTURES)
def model(request):
    return request.getfixturevalue(request.param)


def test_psi_vanishes_at_zero(model):
    assert abs(psi(model, 0.0)) < 1e-12


def test_psi_nonnegative_real_part_on_real_line(model):
    z = np.linspace(-8, 8, 161)
    assert np.all(np.real(model.psi(z)) >= -1e-12)


def test_psi_hermitian_symmetry(model):
    z = np.array([-3.0, -0.4, 0.9, 5.0])
    np.testing.assert_allclose(model.psi(-z), np.conj(model.psi(z)), rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("z", [-1.5, 0.5, 2.0])
def test_psi_matches_levy_khintchine_quadrature(model, z):
    closed = complex(model.psi(z))
    assert abs(closed - psi_lk_quadrature(model, z)) <= 1e-7 * (1 + abs(closed))


def test_psi_prime_matches_central_difference(model):
    z = 0.3 + 0.2j
    h = 1e-5
    fd = (model.psi(z + h) - model.psi(z - h)) / (2 * h)
    assert abs(model.psi_prime(z) - fd) < 1e-6 * (1 + abs(fd))


def test_mean_is_i_times_psi_prime_at_zero(model):
    assert (1j * model.psi_prime(0.0)).real == pytest.approx(model.mean(), rel=1e-9, abs=1e-12)


def test_mirror_reflects_the_exponent(model):
    z = np.array([-2.0, 0.3, 1.7])
    np.testing.assert_allclose(mirror(model).psi(z), model.psi(-z), rtol=1e-12, atol=1e-13)
    assert mirror(model).mean() == pytest.approx(-model.mean(), abs=1e-14)


def test_levy_density_positive_both_sides(model):
    x = np.array([-3.0, -0.5, 0.5, 3.0])
    assert np.all(model.levy_density(x) > 0)


def test_sech_constants(sech):
    assert sech.jump_rate == pytest.approx(math.pi / math.cos(math.pi * 0.125))
    np.testing.assert_allclose(pole_lattice(sech, 3), [1.25, 3.25, 5.25])


def test_sech_eta_solves_root_equation(sech):
    eta = sech.eta(1.0)
    root = sech.alpha + eta
    assert abs(1.0 + sech.psi(1j * root)) < 1e-12


def test_sech_rejects_pole_argument(sech):
    with pytest.raises(PoleError):
        sech.psi(1j * (sech.alpha + 1.0))


def test_sinh_rejects_pole_argument(sinh):
    with pytest.raises(PoleError):
        sinh.psi(1j * (sinh.alpha + 2.0))


def test_sinh_removable_point_at_alpha(sinh):
    assert np.isfinite(sinh.psi(1j * sinh.alpha))


def test_sinh_small_alpha_constants_are_continuous():
    small = SinhSquareModel(alpha=5e-5, sigma=1.0, mu=0.0)
    regular = SinhSquareModel(alpha=1.5e-4, sigma=1.0, mu=0.0)
    slope_small = small.rho_c / small.alpha
    slope_regular = regular.rho_c / regular.alpha
    assert slope_small == pytest.approx(8 * math.pi**2 / 3, rel=1e-6)
    assert slope_regular == pytest.approx(8 * math.pi**2 / 3, rel=1e-6)


def test_sinh_pole_lattice(sinh):
    np.testing.assert_allclose(sinh.pole_lattice(3), [1.25, 2.25, 3.25])


def test_beta_reduces_to_sinh(sinh, sinh_as_beta):
    z = np.array([-4.0, -1.0, 0.5, 2.5])
    np.testing.assert_allclose(sinh_as_beta.psi(z), sinh.psi(z), rtol=1e-9, atol=1e-11)
    assert sinh_as_beta.mean() == pytest.approx(sinh.mean())


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_beta_integer_lambda_is_limit_of_generic_formula(lam):
    def family(value):
        return BetaFamilyModel(c1=1.0, c2=1.0, alpha1=1.2, alpha2=0.8, beta1=1.0, beta2=2.0,
                               lambda1=value, lambda2=value, sigma=0.3, mu=0.2)

    z = np.array([-1.0, 0.7, 2.0])
    exact = family(lam).psi(z)
    nearby = family(lam - 1e-6).psi(z)
    np.testing.assert_allclose(nearby, exact, atol=1e-4)


@pytest.mark.parametrize("n", [0, 1, 4])
def test_beta_psi_prime_is_finite_where_the_kernel_vanishes(beta_bounded_variation, n):
    # s2 + 1 - lambda2 = -n: a zero of B(s2, 1 - lambda2), halfway between two poles
    model = beta_bounded_variation
    z = 1j * (model.beta2 * (model.alpha2 + n + 0.5))
    value = model.psi_prime(z)
    h = 1e-6
    fd = (model.psi(z + h) - model.psi(z - h)) / (2 * h)
    assert np.isfinite(value)
    assert abs(value - fd) < 1e-6 * (1 + abs(fd))


def test_one_sided_beta_has_no_negative_jumps():
    model = BetaFamilyModel(c1=1.0, c2=0.0, alpha1=1.0, alpha2=1.0, beta1=1.0, beta2=1.0,
                            lambda1=1.5, lambda2=1.5, sigma=1.0, mu=0.0)
    assert model.pole_lattice(5).size == 0
    lo, hi = model.positive_brackets(5)
    assert lo.tolist() == [0.0] and hi.tolist() == [math.inf]
    # Psi(i zeta) is analytic at the points that would be poles with c2 > 0
    assert np.all(np.isfinite(model.psi(1j * np.array([1.0, 2.0, 3.0]))))
    assert np.all(model.levy_density(np.array([-2.0, -0.5])) == 0)
    assert model.mirror().pole_lattice(3).size == 3
    z = np.array([-1.5, 0.5, 2.0])
    for zi in z:
        assert abs(complex(model.psi(zi)) - psi_lk_quadrature(model, zi)) <= 1e-7 * (1 + abs(model.psi(zi)))


def test_beta_pole_lattice(beta):
    np.testing.assert_allclose(beta.pole_lattice(3), 1.5 * np.array([1.5, 2.5, 3.5]))


def test_beta_mirror_swaps_sides(beta):
    m = beta.mirror()
    assert (m.c1, m.alpha1, m.beta1, m.lambda1) == (beta.c2, beta.alpha2, beta.beta2, beta.lambda2)
    assert m.mu == -beta.mu


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-0.95, 0.95), z=st.floats(-10, 10))
def test_sech_psi_real_part_nonnegative(alpha, z):
    assert SechPoissonModel(alpha=alpha).psi(z).real >= -1e-12


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "sech", "alpha": 1.0},
        {"family": "sinh", "alpha": 0.2, "sigma": -1.0},
        {"family": "beta", "c1": 1, "c2": 1, "alpha1": 1, "alpha2": 1, "beta1": 1, "beta2": 1,
         "lambda1": 3.5, "lambda2": 1.5},
        {"family": "beta", "c1": 0, "c2": 0, "alpha1": 1, "alpha2": 1, "beta1": 1, "beta2": 1,
         "lambda1": 1.5, "lambda2": 1.5},
        {"family": "beta", "c1": -1, "c2": 1, "alpha1": 1, "alpha2": 1, "beta1": 1, "beta2": 1,
         "lambda1": 1.5, "lambda2": 1.5, "sigma": 1.0},
        {"family": "sech", "alpha": float("nan")},
        {"family": "levy"},
        {"family": "sinh"},
    ],
)
def test_invalid_models_raise_domain_error(kwargs):
    with pytest.raises(DomainError):
        build_model(kwargs)


def test_build_model_and_to_dict_round_trip(sinh):
    rebuilt = build_model(sinh.to_dict())
    assert rebuilt == sinh
