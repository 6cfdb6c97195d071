"""Wiener-Hopf factors phi_q^+(z), phi_q^-(z) as infinite products.

Both factors are evaluated in positive coordinates: with roots r_n > 0 and
poles P_n > 0 of one half-line,

    phi(w) = 1/(1 + w/r_0) * prod_{n>=1} (1 + w/P_n) / (1 + w/r_n)

where phi^- uses the model's own half-line and w = iz, and phi^+ uses the
half-line of the mirrored model and w = -iz. The product is truncated at N
and the tail is replaced by a gamma ratio times an Euler-Maclaurin
correction built from the asymptotic root strands.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, PoleError, RegimeError
from .models import BetaFamilyModel, SechPoissonModel, SinhSquareModel
from .roots import LatticeStrand, RootGrid, half_line_roots, positive_strands

logger = logging.getLogger(__name__)

DEFAULT_N = 200
MAX_N = 1600
NAIVE_N = 10_000
ESCALATION_TOL = 1e-9
ACCURACY_TOL = 1e-7
EM_TERM_TOL = 1e-16
TAIL_ORDER = 3

_CHECK_Z = np.array([-5.0, -1.5, -0.5, 0.7, 2.0, 6.0])
_POLE_TOL = 1e-12
_MIN_CALIBRATION_ROOTS = 16


def _log_derivative_ratios(a1, a2, x1, x2, order: int) -> list:
    """f^(n)/f for n = 0..order with f = x1^{-a1} x2^{-a2}, by the Bell recursion on log f."""
    g = [
        (-1) ** k * math.factorial(k - 1) * (a1 / x1**k + a2 / x2**k)
        for k in range(1, order + 1)
    ]
    h = [np.ones_like(x2)]
    for n in range(order):
        h.append(sum(math.comb(n, k) * g[k] * h[n - k] for k in range(n + 1)))
    return h


def f_euler_maclaurin(a1, a2, z1, z2, N: int):
    """Euler-Maclaurin value of sum_{n>=N} (n + z1)^{-a1} (n + z2)^{-a2}.

    The integral is expanded in powers of (z2 - z1)/(z1 + M); the half-term
    and the Bernoulli terms in f', f''' and f^(5) are added at M. When
    |z2 - z1| is not small against |z1 + N| the first terms n = N..M-1 are
    summed directly so that the expansion ratio stays below 1/2. Vectorized
    over ``z2``.

    Raises:
        DomainError: If a1 + a2 <= 1 or N < 10
    """
    s = a1 + a2
    if not np.real(s) > 1:
        raise DomainError(f"a1 + a2 > 1 required, got a1={a1}, a2={a2}")
    if N < 10:
        raise DomainError(f"N >= 10 required, got N={N}")

    z1 = complex(z1)
    z2_arr = np.asarray(z2, dtype=complex)
    flat = z2_arr.ravel()
    d = flat - z1
    span = float(np.max(np.abs(d))) if d.size else 0.0

    M = N
    total = np.zeros(flat.shape, dtype=complex)
    if span >= abs(z1 + N) / 2:
        M = max(N, int(math.ceil(2 * span - z1.real)) + 1)
        n = np.arange(N, M, dtype=float)
        total += np.sum((n + z1) ** (-a1) * (n[None, :] + flat[:, None]) ** (-a2), axis=1)

    base = z1 + M
    h = _log_derivative_ratios(a1, a2, base, flat + M, 5)
    endpoint = 0.5 - h[1] / 12 + h[3] / 720 - h[5] / 30240
    total += base ** (-a1) * (flat + M) ** (-a2) * endpoint

    coef = 1.0
    for k in range(200):
        term = coef * d**k * base ** (1 - s - k) / (s + k - 1)
        total += term
        if np.max(np.abs(term), initial=0.0) < EM_TERM_TOL * max(1.0, np.max(np.abs(total), initial=0.0)):
            break
        coef *= (-a2 - k) / (k + 1)

    out = total.reshape(z2_arr.shape)
    return complex(out) if out.ndim == 0 else out


def _power_terms(corrections: tuple, m: int) -> Iterator[tuple[complex, float]]:
    # multinomial expansion of (sum_i A_i u^{p_i})^m into (coefficient, total power)
    for combo in combinations_with_replacement(range(len(corrections)), m):
        counts = np.bincount(combo, minlength=len(corrections))
        weight = math.factorial(m)
        coef = 1.0 + 0j
        power = 0.0
        for i, c in enumerate(counts):
            weight //= math.factorial(int(c))
            A, p = corrections[i]
            coef *= A**int(c)
            power += p * int(c)
        yield weight * coef, power


def strand_tail_log(strand: LatticeStrand, J: int, w):
    """log of prod_{j>=J} (1 + w/P_j) / (1 + w/zeta_j) for one strand.

    The exact-lattice part is a ratio of gamma functions; the root
    corrections enter through log(1 + eps/u) expanded to third order and
    summed with ``f_euler_maclaurin``.
    """
    w = np.asarray(w, dtype=complex)
    wp = w / strand.scale
    a, b = strand.pole_offset, strand.root_offset
    value = (
        special.loggamma(J + a) + special.loggamma(J + b + wp)
        - special.loggamma(J + b) - special.loggamma(J + a + wp)
    )
    for m in range(1, TAIL_ORDER + 1):
        sign = 1.0 if m % 2 else -1.0
        for coef, power in _power_terms(strand.corrections, m):
            at_zero = f_euler_maclaurin(-power, m, b, b, J)
            shifted = f_euler_maclaurin(-power, m, b, b + wp, J)
            value = value + sign / m * coef * (at_zero - shifted)
    return value


def strand_tail(strand: LatticeStrand, J: int, w):
    return np.exp(strand_tail_log(strand, J, w))


def accelerate_tail(N: int, z, A1, A2, beta_shift, alpha_shift=None):
    """prod_{n>=N} (1 + z/(n + alpha)) / (1 + z/zeta_n) for zeta_n = v + A1/v + A2/v^2, v = n + beta.

    ``alpha_shift`` defaults to ``beta_shift``.

    Raises:
        DomainError: If N < 10
    """
    if N < 10:
        raise DomainError(f"accelerate_tail needs N >= 10, got N={N}")
    alpha = beta_shift if alpha_shift is None else alpha_shift
    strand = LatticeStrand(1.0, alpha, beta_shift, ((A1, -1.0), (A2, -2.0)))
    value = strand_tail(strand, N, z)
    return complex(value) if np.ndim(value) == 0 else value


def calibrate_strand(strand: LatticeStrand, roots: np.ndarray) -> LatticeStrand:
    """Add one fitted correction term of the next power to a strand.

    The coefficient is a least-squares fit of the remaining root offsets on
    the last quarter of the strand's computed roots. Opt-in through
    ``calibrate=True``; by default factors use the analytic expansion only.
    """
    if not strand.corrections or len(roots) < _MIN_CALIBRATION_ROOTS:
        return strand
    j = np.arange(len(roots))
    power = min(p for _, p in strand.corrections) - 1.0
    window = slice(3 * len(roots) // 4, None)
    u = j[window] + strand.root_offset
    resid = (roots[window] - strand.root(j[window])) / strand.scale
    basis = u**power
    coef = np.vdot(basis, resid) / np.vdot(basis, basis)
    return strand.with_corrections(((coef, power),))


def _split_by_strand(values: np.ndarray, m: int) -> list[np.ndarray]:
    return [values[k::m] for k in range(m)]


@dataclass(frozen=True)
class FactorProduct:
    """A truncated, tail-accelerated product for phi_q^+ or phi_q^-.

    ``r0``, ``roots`` and ``poles`` are in positive coordinates of the side
    model (the model itself for side "minus", its mirror for side "plus").
    ``strands`` is empty when no tail correction is applied.
    """

    model: object
    q: complex
    side: str
    N: int
    r0: complex
    roots: np.ndarray
    poles: np.ndarray
    strands: tuple = ()
    closed_form: bool = False

    @property
    def side_model(self):
        return self.model if self.side == "minus" else self.model.mirror()

    def to_w(self, z):
        z = np.asarray(z, dtype=complex)
        return 1j * z if self.side == "minus" else -1j * z

    def tail_log(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        total = np.zeros(w.shape, dtype=complex)
        m = len(self.strands)
        for k, strand in enumerate(self.strands):
            J = len(range(k, self.N, m))
            total += strand_tail_log(strand, J, w)
        return total

    def log_at(self, w) -> np.ndarray:
        """log phi in the positive coordinate w."""
        w = np.asarray(w, dtype=complex)
        flat = w.ravel()
        ratio_r = flat[:, None] / self.roots[None, :]
        near = np.abs(1.0 + ratio_r) < _POLE_TOL
        if np.any(near) or (self.r0 != 0 and np.any(np.abs(1.0 + flat / self.r0) < _POLE_TOL)):
            raise PoleError(f"z at a pole of phi^{'+' if self.side == 'plus' else '-'}")
        total = np.sum(np.log1p(flat[:, None] / self.poles[None, :]) - np.log1p(ratio_r), axis=1)
        if self.r0 != 0:
            total -= np.log1p(flat / self.r0)
        total += self.tail_log(flat)
        return total.reshape(w.shape)

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=complex)
        if self.closed_form:
            value = phi_closed_sech(self.model.alpha, self.q, z_arr, self.side)
        else:
            value = np.exp(self.log_at(self.to_w(z_arr)))
        return complex(value) if np.ndim(value) == 0 else value

    @classmethod
    def from_roots(cls, model, q, side: str, r0, roots: np.ndarray, calibrate: bool = False,
                   accelerate: bool = True) -> "FactorProduct":
        side_model = model if side == "minus" else model.mirror()
        N = len(roots)
        strands: tuple = ()
        if accelerate:
            raw = positive_strands(side_model, q)
            if calibrate:
                raw = [calibrate_strand(s, r) for s, r in zip(raw, _split_by_strand(roots, len(raw)))]
            strands = tuple(raw)
        return cls(
            model=model, q=q, side=side, N=N, r0=r0,
            roots=np.asarray(roots, dtype=complex),
            poles=side_model.pole_lattice(N).astype(complex),
            strands=strands,
        )

    @classmethod
    def from_grid(cls, model, grid: RootGrid, side: str, calibrate: bool = False) -> "FactorProduct":
        """Factor from an existing (possibly complex-q) root grid."""
        _check_side(side)
        r0, roots = grid.positive_side() if side == "minus" else grid.negative_side()
        try:
            return cls.from_roots(model, grid.q, side, r0, roots, calibrate=calibrate)
        except RegimeError as e:
            logger.warning(f"Tail acceleration unavailable ({e}); using the plain truncated product")
            return cls.from_roots(model, grid.q, side, r0, roots, accelerate=False)

    @classmethod
    def build(cls, model, q, side: str, N: int = DEFAULT_N, max_N: int = MAX_N,
              grid: RootGrid | None = None, use_closed_form: bool | None = None,
              tol: float = ESCALATION_TOL, calibrate: bool = False) -> "FactorProduct":
        """Factor for real q with N doubled until the check values settle.

        Args:
            model: Process model
            q: Real q >= 0
            side: "plus" or "minus"
            N: Starting truncation
            max_N: Largest truncation tried
            grid: Precomputed root grid (used as-is, no escalation)
            use_closed_form: Gamma-ratio closed form (default True for sech)
            tol: Relative change between doublings that ends the escalation
            calibrate: Fit one extra strand correction term to the computed roots

        Raises:
            DomainError: For the minus side at q = 0 or invalid arguments
            AccuracyError: If the change at max_N still exceeds 1e-7
        """
        _check_side(side)
        if side == "minus" and q == 0:
            raise DomainError("phi^- degenerates at q = 0")
        if use_closed_form is None:
            use_closed_form = isinstance(model, SechPoissonModel)
        if use_closed_form:
            if not isinstance(model, SechPoissonModel):
                raise DomainError(f"No closed-form factor for family {model.family}")
            return cls(model=model, q=q, side=side, N=0, r0=0j,
                       roots=np.empty(0, complex), poles=np.empty(0, complex), closed_form=True)
        if grid is not None:
            return cls.from_grid(model, grid, side, calibrate=calibrate)

        side_model = model if side == "minus" else model.mirror()
        try:
            positive_strands(side_model, q)
        except RegimeError as e:
            logger.warning(f"Tail acceleration unavailable ({e}); truncating the product at N={NAIVE_N}")
            r0, roots = half_line_roots(side_model, q, NAIVE_N)
            return cls.from_roots(model, q, side, r0, roots, accelerate=False)

        previous = None
        n = N
        while True:
            r0, roots = half_line_roots(side_model, q, n)
            factor = cls.from_roots(model, q, side, r0, roots, calibrate=calibrate)
            current = factor(_CHECK_Z)
            if previous is not None:
                change = float(np.max(np.abs(current - previous) / np.maximum(1.0, np.abs(previous))))
                logger.debug(f"phi^{side} N={n}: change {change:.2e}")
                if change < tol:
                    break
                if n >= max_N:
                    if change > ACCURACY_TOL:
                        raise AccuracyError(f"phi^{side} not settled at N={n}: change {change:.2e}")
                    logger.warning(f"phi^{side} change {change:.2e} at N={n} above {tol:g}")
                    break
            elif n >= max_N:
                break
            previous = current
            n = min(2 * n, max_N)

        logger.info(f"Built phi^{side} for {model.family} at q={q} with N={factor.N}")
        return factor


def _check_side(side: str) -> None:
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")


def phi(factor: FactorProduct, z):
    """Evaluate a factor at z (scalar or array)."""
    return factor(z)


def phi_plus(model, q, z, **kwargs):
    return FactorProduct.build(model, q, "plus", **kwargs)(z)


def phi_minus(model, q, z, **kwargs):
    return FactorProduct.build(model, q, "minus", **kwargs)(z)


def eta_sech(alpha: float, q):
    return SechPoissonModel(alpha=alpha).eta(q)


def p0_sech(alpha: float, q) -> float:
    """P(S_tau = 0) for the sech model."""
    eta = eta_sech(alpha, q)
    log_p0 = (
        special.loggamma((1 - alpha) / 4) + special.loggamma((3 - alpha) / 4)
        - special.loggamma((eta - alpha) / 4) - special.loggamma((4 - eta - alpha) / 4)
    )
    value = np.exp(log_p0)
    return float(value.real) if np.isrealobj(eta) or np.imag(eta) == 0 else complex(value)


def phi_closed_sech(alpha: float, q, z, side: str = "plus"):
    """Gamma-ratio closed form of the sech factors; phi^- is phi^+ with (z, alpha) -> (-z, -alpha)."""
    _check_side(side)
    z = np.asarray(z, dtype=complex)
    if side == "minus":
        if q == 0:
            raise DomainError("phi^- degenerates at q = 0")
        return phi_closed_sech(-alpha, q, -z, "plus")
    eta = eta_sech(alpha, q)
    iz = 1j * z
    log_value = (
        special.loggamma((eta - alpha - iz) / 4) + special.loggamma((4 - eta - alpha - iz) / 4)
        - special.loggamma((1 - alpha - iz) / 4) - special.loggamma((3 - alpha - iz) / 4)
    )
    value = p0_sech(alpha, q) * np.exp(log_value)
    return complex(value) if value.ndim == 0 else value


def special_point_eta(mu: float) -> float:
    """eta = arccot(mu / 4 pi) / pi of the sinh model at alpha = sigma = 0, q = 4."""
    return (math.pi / 2 - math.atan(mu / (4 * math.pi))) / math.pi


def phi_closed_sinh_special(mu: float, z):
    """phi_4^+(z) = Gamma(eta - iz) / (Gamma(eta) Gamma(1 - iz)) for alpha = sigma = 0."""
    eta = special_point_eta(mu)
    iz = 1j * np.asarray(z, dtype=complex)
    value = np.exp(special.loggamma(eta - iz) - special.loggamma(eta) - special.loggamma(1 - iz))
    return complex(value) if value.ndim == 0 else value


def _has_bounded_variation_atom(model) -> bool:
    return (
        isinstance(model, BetaFamilyModel)
        and model.sigma == 0
        and model.c1 > 0
        and model.lambda1 < 2
        and model.lambda2 < 2
        and model.rho_c > 0
    )


def atom_probability(model, grid: RootGrid) -> float:
    """P(S_tau = 0).

    The sech model uses the closed form. Bounded-variation beta-family
    models with a negative drift (rho > 0) use the regrouped product
    (r_0/P_1) prod_{n>=1} r_n/P_{n+1} of the negative roots; every other
    case has no atom.
    """
    if isinstance(model, SechPoissonModel):
        return p0_sech(model.alpha, grid.q)
    if isinstance(model, SinhSquareModel) or not _has_bounded_variation_atom(model):
        return 0.0

    mirror = model.mirror()
    r0, roots = grid.negative_side()
    roots = np.real(np.asarray(roots))
    poles = mirror.pole_lattice(len(roots) + 1)
    log_value = math.log(float(np.real(r0)) / poles[0]) + float(np.sum(np.log(roots / poles[1:])))

    strand = positive_strands(mirror, float(np.real(grid.q)))[0]
    if abs(strand.root_offset - strand.pole_offset - 1.0) > 1e-12:
        logger.warning("Negative roots approach their lower poles; atom product diverges to 0")
        return 0.0
    J = len(roots)
    b = float(np.real(strand.root_offset))
    for m in range(1, TAIL_ORDER + 1):
        sign = 1.0 if m % 2 else -1.0
        for coef, power in _power_terms(strand.corrections, m):
            log_value += sign / m * float(np.real(coef)) * float(special.zeta(m - power, J + b))
    return float(np.exp(log_value))
