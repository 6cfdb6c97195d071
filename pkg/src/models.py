"""Lévy process families with meromorphic characteristic exponents.

Three families are supported, all immutable dataclasses:

- ``SechPoissonModel``: compound Poisson, jump density e^{ax}/cosh(x), cut-off h = 0.
- ``SinhSquareModel``: jump density e^{ax}/sinh(x/2)^2 plus Gaussian part and drift.
- ``BetaFamilyModel``: the ten-parameter beta family (exponential tails, either side may be empty).

Every model exposes ``psi(z)`` and ``psi_prime(z)`` (vectorized over numpy
arrays), its mean, its mirror image (the model of -X) and the pole lattice of
Psi(i zeta) on the positive half-line. The root, factor and density modules
work on the positive half-line only and reach the negative side through
``mirror()``.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Union

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import DomainError, PoleError, QuadratureError
from .specfun import beta_fn, beta_fn_dx, digamma

logger = logging.getLogger(__name__)

INTEGER_LAMBDA_TOL = 1e-9
POLE_GUARD = 1e-12
SMALL_ALPHA = 1e-4
QUAD_TOL = 1e-8

# |w| below this uses the Taylor series of w*coth(w)
_COTH_SERIES = 1e-3


def _require_finite(**values) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {name}={value}")


def _trigamma(s) -> np.ndarray:
    """Trigamma on real or complex arguments.

    Real arguments go through scipy's polygamma (reflected for s < 0);
    complex ones through mpmath.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.all(arr.imag == 0):
        x = arr.real
        out = np.empty_like(x)
        pos = x > 0
        out[pos] = special.polygamma(1, x[pos])
        neg = ~pos
        out[neg] = (np.pi / np.sin(np.pi * x[neg])) ** 2 - special.polygamma(1, 1.0 - x[neg])
        result = out.astype(complex)
    else:
        result = np.array([complex(mpmath.psi(1, complex(v))) for v in arr.ravel()])
        result = result.reshape(arr.shape)
    return result.reshape(np.shape(s))


class LevyModel(ABC):
    """Common interface of the supported process families."""

    family: ClassVar[str] = ""
    # True when the Lévy-Khintchine cut-off is h(x) = x, False for h = 0
    identity_cutoff: ClassVar[bool] = True

    @abstractmethod
    def psi(self, z):
        """Characteristic exponent Psi(z), E exp(i z X_t) = exp(-t Psi(z))."""

    @abstractmethod
    def psi_prime(self, z):
        """Analytic derivative Psi'(z)."""

    @abstractmethod
    def mean(self) -> float:
        """E X_1."""

    @abstractmethod
    def mirror(self) -> "LevyModel":
        """Model of the reflected process -X."""

    @abstractmethod
    def pole_lattice(self, count: int) -> np.ndarray:
        """First ``count`` poles of Psi(i zeta) on zeta > 0, increasing."""

    @abstractmethod
    def positive_brackets(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Localization intervals (lo, hi) of zeta_0^+, zeta_1, ..., zeta_count."""

    @abstractmethod
    def levy_density(self, x) -> np.ndarray:
        """Density of the Lévy measure at x != 0."""

    @property
    def gaussian_sigma(self) -> float:
        return 0.0

    @property
    def drift(self) -> float:
        return 0.0

    def to_dict(self) -> dict:
        data = {k: v for k, v in asdict(self).items() if k not in ("gamma_c", "rho_c")}
        data["family"] = self.family
        return data


def _interlaced_brackets(poles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # zeta_0^+ in (0, P_1), zeta_n in (P_n, P_{n+1})
    lo = np.concatenate(([0.0], poles[:-1]))
    hi = poles.copy()
    return lo, hi


@dataclass(frozen=True)
class SechPoissonModel(LevyModel):
    """Compound Poisson process with jump density e^{alpha x} / cosh(x)."""

    alpha: float

    family: ClassVar[str] = "sech"
    identity_cutoff: ClassVar[bool] = False

    def __post_init__(self):
        _require_finite(alpha=self.alpha)
        if not abs(self.alpha) < 1:
            raise DomainError(f"|alpha| < 1 required for the sech model, got alpha={self.alpha}")

    @property
    def jump_rate(self) -> float:
        """Total jump intensity pi * sec(pi alpha / 2)."""
        return math.pi / math.cos(math.pi * self.alpha / 2)

    def eta(self, q):
        """Root shift: the roots of q + Psi(i zeta) are alpha +- eta + 4k.

        Real for real q >= 0, principal-branch complex otherwise.
        """
        x = math.pi / (q + self.jump_rate)
        if np.iscomplexobj(q) and np.imag(q) != 0:
            return complex(2 / math.pi * np.arccos(complex(x)))
        return 2 / math.pi * math.acos(float(np.real(x)))

    def _check_poles(self, z: np.ndarray) -> None:
        # poles at z = i(alpha + 2k + 1)
        d = (-1j * z - self.alpha - 1.0) / 2.0
        if np.any(np.abs(d - np.round(d.real)) < POLE_GUARD):
            raise PoleError(f"z on the sech pole lattice i(alpha + 2k + 1), alpha={self.alpha}")

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_poles(z)
        a = math.pi * self.alpha / 2
        theta = a + 0.5j * math.pi * z
        # pi sec(a) - pi sec(theta), written so that z = 0 cancels exactly
        value = (
            -2 * math.pi * np.sin((theta + a) / 2) * np.sin((theta - a) / 2)
            / (math.cos(a) * np.cos(theta))
        )
        return value if value.ndim else complex(value)

    def psi_prime(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_poles(z)
        theta = math.pi * self.alpha / 2 + 0.5j * math.pi * z
        value = -0.5j * math.pi**2 * np.sin(theta) / np.cos(theta) ** 2
        return value if value.ndim else complex(value)

    def mean(self) -> float:
        a = math.pi * self.alpha / 2
        return 0.5 * math.pi**2 * math.sin(a) / math.cos(a) ** 2

    def mirror(self) -> "SechPoissonModel":
        return SechPoissonModel(alpha=-self.alpha)

    def pole_lattice(self, count: int) -> np.ndarray:
        n = np.arange(1, count + 1, dtype=float)
        return self.alpha + 2 * n - 1

    def positive_brackets(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        n = np.arange(1, count + 1)
        j = (n + 1) // 2
        odd = n % 2 == 1
        lo_n = np.where(odd, self.alpha + 4 * j - 1, self.alpha + 4 * j)
        lo = np.concatenate(([0.0], lo_n))
        hi = np.concatenate(([self.alpha + 1.0], lo_n + 1.0))
        return lo, hi

    def levy_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        log_cosh = ax + np.log1p(np.exp(-2 * ax)) - math.log(2.0)
        return np.exp(self.alpha * x - log_cosh)


@dataclass(frozen=True)
class SinhSquareModel(LevyModel):
    """Process with jump density e^{alpha x} / sinh(x/2)^2, volatility and drift.

    Psi(z) = sigma^2 z^2 / 2 + i rho z + 4 pi (z - i alpha) coth(pi (z - i alpha)) - 4 gamma
    """

    alpha: float
    sigma: float = 0.0
    mu: float = 0.0
    gamma_c: float = field(init=False)
    rho_c: float = field(init=False)

    family: ClassVar[str] = "sinh"

    def __post_init__(self):
        _require_finite(alpha=self.alpha, sigma=self.sigma, mu=self.mu)
        if not abs(self.alpha) < 1:
            raise DomainError(f"|alpha| < 1 required for the sinh model, got alpha={self.alpha}")
        if self.sigma < 0:
            raise DomainError(f"sigma >= 0 required, got sigma={self.sigma}")
        x = math.pi * self.alpha
        if abs(self.alpha) < SMALL_ALPHA:
            gamma_c = 1.0 - x**2 / 3 - x**4 / 45
            rho_plus_mu = 8 * math.pi * x / 3 + 16 * math.pi * x**3 / 45
        else:
            gamma_c = x / math.tan(x)
            rho_plus_mu = 4 * math.pi * x / math.sin(x) ** 2 - 4 * math.pi / math.tan(x)
        object.__setattr__(self, "gamma_c", gamma_c)
        object.__setattr__(self, "rho_c", rho_plus_mu - self.mu)

    @property
    def gaussian_sigma(self) -> float:
        return self.sigma

    @property
    def drift(self) -> float:
        return self.mu

    def _reduced(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """w = pi(z - i alpha) and its representative modulo i pi."""
        w = math.pi * (z - 1j * self.alpha)
        k = np.round(w.imag / math.pi)
        w_red = w - 1j * math.pi * k
        if np.any((k != 0) & (np.abs(w_red) < math.pi * POLE_GUARD)):
            raise PoleError(f"z on the sinh pole lattice i(alpha + n), alpha={self.alpha}")
        return w, w_red, k

    @staticmethod
    def _x_coth_x(w, w_red, k):
        small = (k == 0) & (np.abs(w_red) < _COTH_SERIES)
        safe = np.where(small, 1.0, w_red)
        with np.errstate(all="ignore"):
            general = w / np.tanh(safe)
        w2 = w_red**2
        series = 1.0 + w2 / 3 - w2**2 / 45
        return np.where(small, series, general)

    @staticmethod
    def _x_coth_x_prime(w, w_red, k):
        small = (k == 0) & (np.abs(w_red) < _COTH_SERIES)
        safe = np.where(small, 1.0, w_red)
        with np.errstate(all="ignore"):
            c = 1.0 / np.tanh(safe)
            general = c - w * (c * c - 1.0)
        series = 2 * w_red / 3 - 4 * w_red**3 / 45
        return np.where(small, series, general)

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        w, w_red, k = self._reduced(z)
        h = self._x_coth_x(w, w_red, k)
        w0, w0_red, k0 = self._reduced(np.zeros(1, dtype=complex))
        h0 = self._x_coth_x(w0, w0_red, k0)[0]
        value = 0.5 * self.sigma**2 * z**2 + 1j * self.rho_c * z + 4.0 * (h - h0)
        return value if value.ndim else complex(value)

    def psi_prime(self, z):
        z = np.asarray(z, dtype=complex)
        w, w_red, k = self._reduced(z)
        value = self.sigma**2 * z + 1j * self.rho_c + 4 * math.pi * self._x_coth_x_prime(w, w_red, k)
        return value if value.ndim else complex(value)

    def mean(self) -> float:
        return self.mu

    def mirror(self) -> "SinhSquareModel":
        return SinhSquareModel(alpha=-self.alpha, sigma=self.sigma, mu=-self.mu)

    def pole_lattice(self, count: int) -> np.ndarray:
        return self.alpha + np.arange(1, count + 1, dtype=float)

    def positive_brackets(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        return _interlaced_brackets(self.pole_lattice(count + 1))

    def levy_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        return 4.0 * np.exp(self.alpha * x - ax) / np.expm1(-ax) ** 2


def _lambda_kind(lam: float) -> int:
    """1 or 2 when lam is (numerically) that integer, else 0."""
    for k in (1, 2):
        if abs(lam - k) < INTEGER_LAMBDA_TOL:
            return k
    return 0


def _kernel(s, lam: float):
    """K(s): B(s; 1 - lam), or its digamma forms at lam = 1, 2."""
    kind = _lambda_kind(lam)
    if kind == 1:
        return -digamma(s)
    if kind == 2:
        return (np.asarray(s) - 1.0) * digamma(s)
    return beta_fn(s, 1.0 - lam)


def _kernel_prime(s, lam: float):
    """dK/ds."""
    kind = _lambda_kind(lam)
    if kind == 1:
        digamma(s)  # pole check
        return -_trigamma(s)
    if kind == 2:
        return digamma(s) + (np.asarray(s) - 1.0) * _trigamma(s)
    return beta_fn_dx(s, 1.0 - lam)


@dataclass(frozen=True)
class BetaFamilyModel(LevyModel):
    """Beta-family process.

    Lévy density c1 e^{-alpha1 beta1 x} / (1 - e^{-beta1 x})^lambda1 for x > 0 and
    c2 e^{alpha2 beta2 x} / (1 - e^{beta2 x})^lambda2 for x < 0, cut-off h(x) = x.
    Psi is evaluated in compensated form so that Psi(0) = 0 exactly for every
    lambda, including the digamma cases lambda in {1, 2}.
    """

    c1: float
    c2: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    lambda1: float
    lambda2: float
    sigma: float = 0.0
    mu: float = 0.0
    gamma_c: float = field(init=False)
    rho_c: float = field(init=False)

    family: ClassVar[str] = "beta"

    def __post_init__(self):
        _require_finite(
            c1=self.c1, c2=self.c2, alpha1=self.alpha1, alpha2=self.alpha2,
            beta1=self.beta1, beta2=self.beta2, lambda1=self.lambda1,
            lambda2=self.lambda2, sigma=self.sigma, mu=self.mu,
        )
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} > 0 required, got {name}={getattr(self, name)}")
        for name in ("c1", "c2"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} >= 0 required, got {name}={getattr(self, name)}")
        if self.c1 == 0 and self.c2 == 0 and self.sigma == 0:
            raise DomainError("At least one of c1, c2, sigma must be positive")
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if not 0 < value < 3:
                raise DomainError(f"{name} in (0, 3) required, got {name}={value}")
        if self.sigma < 0:
            raise DomainError(f"sigma >= 0 required, got sigma={self.sigma}")

        k1 = _kernel(complex(self.alpha1), self.lambda1)
        k2 = _kernel(complex(self.alpha2), self.lambda2)
        k1p = complex(_kernel_prime(complex(self.alpha1), self.lambda1))
        k2p = complex(_kernel_prime(complex(self.alpha2), self.lambda2))
        gamma_c = (self.c1 / self.beta1 * k1 + self.c2 / self.beta2 * k2).real
        rho_c = (-self.mu - self.c1 / self.beta1**2 * k1p + self.c2 / self.beta2**2 * k2p).real
        object.__setattr__(self, "gamma_c", gamma_c)
        object.__setattr__(self, "rho_c", rho_c)

    @property
    def gaussian_sigma(self) -> float:
        return self.sigma

    @property
    def drift(self) -> float:
        return self.mu

    def _sides(self, z: np.ndarray):
        s1 = self.alpha1 - 1j * z / self.beta1
        s2 = self.alpha2 + 1j * z / self.beta2
        return s1, s2

    def _compensated(self, s, alpha: float, lam: float):
        a = np.full_like(s, alpha)
        return _kernel(s, lam) - _kernel(a, lam) - (s - a) * _kernel_prime(a, lam)

    def _compensated_prime(self, s, alpha: float, lam: float):
        a = np.full_like(s, alpha)
        return _kernel_prime(s, lam) - _kernel_prime(a, lam)

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        s1, s2 = self._sides(z)
        value = 0.5 * self.sigma**2 * z**2 - 1j * self.mu * z
        # a side with c = 0 carries no jumps and no poles
        if self.c1 > 0:
            value = value - self.c1 / self.beta1 * self._compensated(s1, self.alpha1, self.lambda1)
        if self.c2 > 0:
            value = value - self.c2 / self.beta2 * self._compensated(s2, self.alpha2, self.lambda2)
        return value if value.ndim else complex(value)

    def psi_prime(self, z):
        z = np.asarray(z, dtype=complex)
        s1, s2 = self._sides(z)
        value = self.sigma**2 * z - 1j * self.mu
        if self.c1 > 0:
            value = value + 1j * self.c1 / self.beta1**2 * self._compensated_prime(s1, self.alpha1, self.lambda1)
        if self.c2 > 0:
            value = value - 1j * self.c2 / self.beta2**2 * self._compensated_prime(s2, self.alpha2, self.lambda2)
        return value if value.ndim else complex(value)

    def mean(self) -> float:
        return self.mu

    def mirror(self) -> "BetaFamilyModel":
        return BetaFamilyModel(
            c1=self.c2, c2=self.c1, alpha1=self.alpha2, alpha2=self.alpha1,
            beta1=self.beta2, beta2=self.beta1, lambda1=self.lambda2,
            lambda2=self.lambda1, sigma=self.sigma, mu=-self.mu,
        )

    def pole_lattice(self, count: int) -> np.ndarray:
        if self.c2 == 0:
            return np.empty(0)
        return self.beta2 * (self.alpha2 + np.arange(count, dtype=float))

    def positive_brackets(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Interlaced brackets; without negative jumps only zeta_0^+ exists, in (0, inf)."""
        if self.c2 == 0:
            return np.zeros(1), np.full(1, np.inf)
        return _interlaced_brackets(self.pole_lattice(count + 1))

    def levy_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        neg = x < 0
        xp = x[pos]
        out[pos] = self.c1 * np.exp(-self.alpha1 * self.beta1 * xp) / (-np.expm1(-self.beta1 * xp)) ** self.lambda1
        xn = -x[neg]
        out[neg] = self.c2 * np.exp(-self.alpha2 * self.beta2 * xn) / (-np.expm1(-self.beta2 * xn)) ** self.lambda2
        return out


ProcessModel = Union[SechPoissonModel, SinhSquareModel, BetaFamilyModel]

MODEL_CLASSES = {
    "sech": SechPoissonModel,
    "sinh": SinhSquareModel,
    "beta": BetaFamilyModel,
}

MODEL_FIELDS = {
    "sech": ["alpha"],
    "sinh": ["alpha", "sigma", "mu"],
    "beta": ["c1", "c2", "alpha1", "alpha2", "beta1", "beta2", "lambda1", "lambda2", "sigma", "mu"],
}


def build_model(config: dict) -> ProcessModel:
    """Construct a model from a flat mapping with a ``family`` key.

    Raises:
        DomainError: If the family is unknown or a model invariant fails
    """
    family = config.get("family")
    if family not in MODEL_CLASSES:
        raise DomainError(f"Unknown model family '{family}'. Must be one of: {list(MODEL_CLASSES)}")
    kwargs = {}
    for name in MODEL_FIELDS[family]:
        if name in config and config[name] is not None:
            kwargs[name] = float(config[name])
    missing = [
        name for name in MODEL_FIELDS[family]
        if name not in kwargs and name not in ("sigma", "mu")
    ]
    if missing:
        raise DomainError(f"Missing parameters for family '{family}': {missing}")
    return MODEL_CLASSES[family](**kwargs)


def model_from_dict(data: dict) -> ProcessModel:
    return build_model(data)


def psi(model: ProcessModel, z):
    """Characteristic exponent of ``model`` at z (scalar or array)."""
    return model.psi(z)


def psi_prime(model: ProcessModel, z):
    """Analytic derivative of the characteristic exponent."""
    return model.psi_prime(z)


def mean(model: ProcessModel) -> float:
    return model.mean()


def mirror(model: ProcessModel) -> ProcessModel:
    return model.mirror()


def pole_lattice(model: ProcessModel, count: int) -> np.ndarray:
    return model.pole_lattice(count)


def _sin_minus_linear(y: np.ndarray) -> np.ndarray:
    # sin(y) - y without cancellation for small y
    y2 = y * y
    series = -y * y2 / 6 * (1 - y2 / 20 * (1 - y2 / 42))
    return np.where(np.abs(y) < 1e-2, series, np.sin(y) - y)


def psi_lk_quadrature(model: ProcessModel, z: float) -> complex:
    """Psi(z) for real z by direct quadrature of the Lévy-Khintchine integral.

    Psi(z) = sigma^2 z^2 / 2 - i mu z - int (e^{izx} - 1 - i z h(x)) nu(dx),
    folded onto x > 0. The cosine part uses -2 sin^2(zx/2) and the sine part
    subtracts the linear term analytically, so the integrand stays bounded
    at the origin. Independent of the closed forms in ``psi``.

    Raises:
        DomainError: If z is not a finite real number
        QuadratureError: If the estimated absolute error exceeds 1e-8
    """
    if np.iscomplexobj(z) and np.imag(z) != 0:
        raise DomainError(f"psi_lk_quadrature needs real z, got {z}")
    z = float(np.real(z))
    _require_finite(z=z)
    if z == 0.0:
        return 0j

    def nu_even(x):
        return model.levy_density(np.array([x]))[0] + model.levy_density(np.array([-x]))[0]

    def nu_odd(x):
        return model.levy_density(np.array([x]))[0] - model.levy_density(np.array([-x]))[0]

    def real_part(x):
        return -2.0 * math.sin(0.5 * z * x) ** 2 * nu_even(x)

    def imag_part(x):
        if model.identity_cutoff:
            return float(_sin_minus_linear(np.array([z * x]))[0]) * nu_odd(x)
        return math.sin(z * x) * nu_odd(x)

    total = 0j
    error = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, np.inf)):
        re, re_err = integrate.quad(real_part, lo, hi, epsabs=1e-11, epsrel=1e-11, limit=400)
        im, im_err = integrate.quad(imag_part, lo, hi, epsabs=1e-11, epsrel=1e-11, limit=400)
        total += re + 1j * im
        error += re_err + im_err

    if error > QUAD_TOL:
        raise QuadratureError(f"Lévy-Khintchine quadrature error {error:.2e} exceeds {QUAD_TOL:.0e} at z={z}")

    return 0.5 * model.gaussian_sigma**2 * z**2 - 1j * model.drift * z - total
