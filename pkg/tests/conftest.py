"""Shared model fixtures."""

import math

import pytest

from src.models import BetaFamilyModel, SechPoissonModel, SinhSquareModel


@pytest.fixture
def sech():
    return SechPoissonModel(alpha=0.25)


@pytest.fixture
def sech_negative_mean():
    return SechPoissonModel(alpha=-0.25)


@pytest.fixture
def sinh():
    """Jump-diffusion with volatility, the usual worked example."""
    return SinhSquareModel(alpha=0.25, sigma=1.0, mu=-0.1)


@pytest.fixture
def sinh_special():
    """alpha = sigma = 0, mu = 4 pi: closed forms hold at q = 4 with eta = 1/4."""
    return SinhSquareModel(alpha=0.0, sigma=0.0, mu=4 * math.pi)


@pytest.fixture
def beta():
    return BetaFamilyModel(
        c1=1.0, c2=1.5, alpha1=1.0, alpha2=1.5, beta1=1.0, beta2=1.5,
        lambda1=1.5, lambda2=1.2, sigma=0.5, mu=0.1,
    )


@pytest.fixture
def beta_bounded_variation():
    """sigma = 0, both lambdas below 2, symmetric jumps and mu = -0.5 so rho = 0.5 > 0."""
    return BetaFamilyModel(
        c1=1.0, c2=1.0, alpha1=1.0, alpha2=1.0, beta1=1.0, beta2=1.0,
        lambda1=1.5, lambda2=1.5, sigma=0.0, mu=-0.5,
    )


@pytest.fixture
def sinh_as_beta():
    """SinhSquare(alpha=0.25, sigma=1, mu=-0.1) written as a beta-family process."""
    return BetaFamilyModel(
        c1=4.0, c2=4.0, alpha1=0.75, alpha2=1.25, beta1=1.0, beta2=1.0,
        lambda1=2.0, lambda2=2.0, sigma=1.0, mu=-0.1,
    )
