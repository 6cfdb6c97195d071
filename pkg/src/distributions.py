"""Distribution of the supremum S = sup_{s <= horizon} X_s.

At an exponential horizon tau ~ Exp(q) the law of S_tau is an atom at 0
plus a mixture of exponentials whose rates are the negative roots (in
positive coordinates r_k = -zeta_{-k}). The weights are the residues of
phi_q^+ and are computed by the same truncated product as the factor.

For a fixed horizon t the density is recovered from the exponential-horizon
density along the vertical line q = q0 + iu with a Filon cosine transform.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, TruncationError
from .models import SechPoissonModel
from .roots import RootGrid, RootTracker, solve_real_q
from .specfun import gauss_2f1
from .wh_factors import (
    FactorProduct,
    atom_probability,
    eta_sech,
    p0_sech,
    special_point_eta,
)

logger = logging.getLogger(__name__)

DEFAULT_K = 40
X_MIN = 1e-3


def residue_coefficients(factor: FactorProduct, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Rates r_0..r_count and mixture weights c_0..c_count of a phi^+ product.

    c_k is the residue of phi^+(w) at w = -r_k divided by r_k.
    """
    if count > factor.N:
        raise DomainError(f"Need at least {count} roots, grid has {factor.N}")
    rates = np.concatenate(([factor.r0], factor.roots[:count])).astype(complex)
    total = np.sum(np.log(1.0 - rates[:, None] / factor.poles[None, :]), axis=1)

    ratio = rates[:, None] / factor.roots[None, :]
    k = np.arange(1, count + 1)
    ratio[k, k - 1] = 0.0
    total -= np.sum(np.log(1.0 - ratio), axis=1)
    total[1:] -= np.log(1.0 - rates[1:] / factor.r0)
    total += factor.tail_log(-rates)
    return rates, np.exp(total)


def _remainder_mass(tail_weights: np.ndarray, block: int) -> tuple[complex, float]:
    """Mass of the weights past the end of ``tail_weights`` and an error bound.

    Block sums s_b over the last half are fitted by log|s_b| = a - p log b + c/b,
    and the remainder sum_{b>B} e^a b^{-p} e^{c/b} is expanded to second order
    in c/b and summed with the Hurwitz zeta function.
    """
    B = len(tail_weights) // block
    if B < 8:
        return 0.0, 0.0
    sums = tail_weights[: B * block].reshape(B, block).sum(axis=1)
    half = sums[B // 2:]
    index = np.arange(B // 2 + 1, B + 1, dtype=float)
    mags = np.abs(half)
    keep = mags > 1e-300
    if keep.sum() < 4:
        return 0.0, 0.0
    design = np.column_stack((np.ones(keep.sum()), np.log(index[keep]), 1.0 / index[keep]))
    (log_amp, slope, c), *_ = np.linalg.lstsq(design, np.log(mags[keep]), rcond=None)
    decay = -slope
    if decay <= 1:
        raise AccuracyError(f"Mixture weights decay too slowly to bound the tail (exponent {decay:.3f})")
    amp = math.exp(log_amp)
    start = B + 1
    remainder = amp * float(
        special.zeta(decay, start) + c * special.zeta(decay + 1, start)
        + 0.5 * c * c * special.zeta(decay + 2, start)
    )
    fit_spread = float(np.max(np.abs(design @ np.array([log_amp, slope, c]) - np.log(mags[keep]))))
    error = remainder * fit_spread + amp * abs(c) ** 3 / 6 * float(special.zeta(decay + 3, start))
    phase = half[-1] / abs(half[-1]) if abs(half[-1]) > 0 else 1.0
    return remainder * phase, error


@dataclass
class SupDensity:
    """Atom plus exponential mixture for the law of S_tau.

    ``rates`` are the positive decay rates r_0..r_K (exponents are their
    negatives); ``tail_mass`` is the total weight of the omitted terms.
    For complex q all weights are complex and only linear combinations
    over u are meaningful.
    """

    atom: complex
    rates: np.ndarray
    coefficients: np.ndarray
    K: int
    tail_mass: complex = 0.0
    tail_mass_error: float = 0.0
    tail_rate: complex = math.inf
    q: complex = 0.0

    @property
    def exponents(self) -> np.ndarray:
        return -self.rates

    def _real(self, value):
        return np.real(value) if np.isrealobj(self.q) or np.imag(self.q) == 0 else value

    def _x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("x >= 0 required")
        return x

    def _tail_density(self, x: np.ndarray):
        if not np.isfinite(self.tail_rate):
            return 0.0
        return self.tail_mass * self.tail_rate * np.exp(-self.tail_rate * x)

    def density(self, x):
        """d/dx P(S <= x) for x > 0; the omitted terms enter as one exponential at ``tail_rate``."""
        x = self._x(x)
        terms = np.exp(-np.multiply.outer(x, self.rates)) @ (self.coefficients * self.rates)
        return self._real(terms + self._tail_density(x))

    def cdf(self, x):
        x = self._x(x)
        series = (1.0 - np.exp(-np.multiply.outer(x, self.rates))) @ self.coefficients
        tail = self.tail_mass * -np.expm1(-self.tail_rate * x) if np.isfinite(self.tail_rate) else 0.0
        return self._real(self.atom + series + tail)

    def survival(self, x):
        """P(S > x): probability that the level x is crossed before the horizon."""
        return 1.0 - self.cdf(x)

    def mean(self):
        """E S, the expected supremum."""
        value = np.sum(self.coefficients / self.rates)
        if np.isfinite(self.tail_rate):
            value += self.tail_mass / self.tail_rate
        return self._real(value)

    def total_mass(self):
        return self._real(self.atom + np.sum(self.coefficients) + self.tail_mass)

    def error_estimate(self, x):
        """Size of the omitted mixture terms at x."""
        x = self._x(x)
        if not np.isfinite(self.tail_rate):
            return np.zeros_like(x)
        bound = abs(self.tail_mass) + self.tail_mass_error
        return bound * np.abs(self.tail_rate * np.exp(-self.tail_rate * x))


@dataclass
class _Mixture:
    rates: np.ndarray
    coefficients: np.ndarray
    K: int
    tail_mass: complex
    tail_mass_error: float
    tail_rate: complex


def _mixture_from_factor(factor: FactorProduct, K: int, extrapolate: bool = True) -> _Mixture:
    """First K + 1 terms of the phi^+ mixture and the mass of the rest.

    Weights up to three quarters of the product's roots are computed exactly;
    with ``extrapolate`` the remainder comes from ``_remainder_mass``. A half-line
    without roots beyond r_0 gives a single exponential.
    """
    K = min(K, factor.N)
    block = max(1, len(factor.strands))
    mass_count = max(K, (3 * factor.N // 4) // block * block)
    rates, weights = residue_coefficients(factor, mass_count)
    remainder, remainder_error = _remainder_mass(weights[1:], block) if extrapolate else (0.0, 0.0)
    tail = np.sum(weights[K + 1:]) + remainder
    tail_rate = rates[K + 1] if len(rates) > K + 1 else math.inf
    return _Mixture(rates[: K + 1], weights[: K + 1], K, tail, remainder_error, tail_rate)


def sup_density_expq(model, grid: RootGrid, K: int = DEFAULT_K) -> SupDensity:
    """Density of S_tau, tau ~ Exp(q), as an exponential series in the negative roots.

    Weights beyond K (up to 3N/4) are summed into ``tail_mass`` and the rest
    is estimated from their power-law decay.

    Raises:
        DomainError: If the grid has fewer than 2K roots
        AccuracyError: If the weights decay too slowly for a tail estimate
    """
    if K < 1:
        raise DomainError(f"K >= 1 required, got K={K}")
    if grid.N < 2 * K:
        raise DomainError(f"Root grid N={grid.N} too small for K={K}; need N >= 2K")
    factor = FactorProduct.from_grid(model, grid, "plus")
    mixture = _mixture_from_factor(factor, K)

    real_q = not (np.iscomplexobj(grid.q) and np.imag(grid.q) != 0)
    coefficients, rates_k = mixture.coefficients, mixture.rates
    tail, tail_rate = mixture.tail_mass, mixture.tail_rate
    if real_q:
        coefficients, rates_k, tail = np.real(coefficients), np.real(rates_k), float(np.real(tail))
        tail_rate = float(np.real(tail_rate))

    density = SupDensity(
        atom=atom_probability(model, grid),
        rates=rates_k,
        coefficients=coefficients,
        K=mixture.K,
        tail_mass=tail,
        tail_mass_error=mixture.tail_mass_error,
        tail_rate=tail_rate,
        q=grid.q,
    )
    logger.info(
        f"Supremum law at q={grid.q}: atom {density.atom:.6g}, K={density.K}, "
        f"tail mass {abs(tail):.2e}, total mass {density.total_mass():.10f}"
    )
    return density


def sup_cdf_expq(dens: SupDensity, x):
    return dens.cdf(x)


def sup_density_closed_sech(alpha: float, q: float, x):
    """Closed-form density of S_tau for the sech model (two 2F1 terms in e^{-4x}).

    Raises:
        DomainError: For x <= 0, or q = 0 with alpha >= 0
    """
    if q == 0 and not alpha < 0:
        raise DomainError(f"q = 0 requires alpha < 0, got alpha={alpha}")
    SechPoissonModel(alpha=alpha)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x_arr <= 0):
        raise DomainError("x > 0 required")
    eta = eta_sech(alpha, q)
    p0 = p0_sech(alpha, q)
    lg = special.gammaln
    pref = 2 * p0 / math.pi / math.tan(math.pi * eta / 2)
    first = math.exp(lg((1 + eta) / 4) + lg((3 + eta) / 4) - lg(eta / 2))
    second = math.exp(lg((5 - eta) / 4) + lg((7 - eta) / 4) - lg((4 - eta) / 2))
    out = np.empty_like(x_arr)
    for i, xi in enumerate(x_arr):
        y = math.exp(-4 * xi)
        f1 = gauss_2f1((1 + eta) / 4, (3 + eta) / 4, eta / 2, y)
        f2 = gauss_2f1((5 - eta) / 4, (7 - eta) / 4, (4 - eta) / 2, y)
        out[i] = pref * (
            first * math.exp((alpha - eta) * xi) * f1
            - second * math.exp((alpha - 4 + eta) * xi) * f2
        )
    return float(out[0]) if np.ndim(x) == 0 else out


def sup_density_closed_sinh_special(mu: float, x):
    """sin(pi eta)/pi (e^x - 1)^{-eta}: density at alpha = sigma = 0, q = 4."""
    eta = special_point_eta(mu)
    x = np.asarray(x, dtype=float)
    return math.sin(math.pi * eta) / math.pi * np.expm1(x) ** (-eta)


def sup_density_surface(model, q_list, x_grid, N: int = 200, K: int = DEFAULT_K) -> np.ndarray:
    """p^S(q, x) on a q-by-x grid."""
    x_grid = np.asarray(x_grid, dtype=float)
    surface = np.empty((len(q_list), len(x_grid)))
    for i, q in enumerate(q_list):
        dens = sup_density_expq(model, solve_real_q(model, q, N), K)
        surface[i] = dens.density(x_grid)
    return surface


# Filon quadrature -----------------------------------------------------------

def _filon_weights(theta: float) -> tuple[float, float, float]:
    if abs(theta) < 0.1:
        t2 = theta * theta
        alpha = theta * t2 * (2 / 45 - t2 * (2 / 315 - t2 * 2 / 4725))
        beta = 2 / 3 + t2 * (2 / 15 - t2 * (4 / 105 - t2 * 2 / 567))
        gamma = 4 / 3 - t2 * (2 / 15 - t2 * (1 / 210 - t2 / 11340))
        return alpha, beta, gamma
    s, c = math.sin(theta), math.cos(theta)
    t3 = theta**3
    alpha = (theta * theta + theta * s * c - 2 * s * s) / t3
    beta = 2 * (theta * (1 + c * c) - 2 * s * c) / t3
    gamma = 4 * (s - theta * c) / t3
    return alpha, beta, gamma


def filon_cos_sin(values: np.ndarray, u0: float, h: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(int f cos(tu) du, int f sin(tu) du) over [u0, u0 + 2n h].

    ``values`` has 2n + 1 rows (one per sample) and any number of columns.
    """
    n_pts = values.shape[0]
    if n_pts < 3 or (n_pts - 1) % 2:
        raise DomainError("Filon panels need an odd number (>= 3) of samples")
    alpha, beta, gamma = _filon_weights(t * h)
    u = u0 + h * np.arange(n_pts)
    cos_tu = np.cos(t * u)[:, None]
    sin_tu = np.sin(t * u)[:, None]
    first, last = values[0], values[-1]

    c_even = np.sum(values[0::2] * cos_tu[0::2], axis=0) - 0.5 * (first * cos_tu[0] + last * cos_tu[-1])
    c_odd = np.sum(values[1::2] * cos_tu[1::2], axis=0)
    s_even = np.sum(values[0::2] * sin_tu[0::2], axis=0) - 0.5 * (first * sin_tu[0] + last * sin_tu[-1])
    s_odd = np.sum(values[1::2] * sin_tu[1::2], axis=0)

    cos_int = h * (alpha * (last * sin_tu[-1] - first * sin_tu[0]) + beta * c_even + gamma * c_odd)
    sin_int = h * (alpha * (first * cos_tu[0] - last * cos_tu[-1]) + beta * s_even + gamma * s_odd)
    return cos_int, sin_int


@dataclass
class InversionParams:
    """Controls for the fixed-horizon inversion.

    ``q0=None`` picks 2/t (2 / mean(t) for several horizons).
    """

    q0: float | None = None
    N: int = 200
    K: int = DEFAULT_K
    u_cap: float = 2000.0
    chunk: float = 100.0
    envelope_tol: float = 1e-9
    imag_tol: float = 1e-6
    # (end, step) of the leading panels; the rest uses ``tail_step`` in chunks
    panels: tuple = ((10.0, 0.02), (100.0, 0.1))
    tail_step: float = 0.5


@dataclass
class FixedTimeDensity:
    """p_t(x) on an x-grid with inversion diagnostics."""

    t: float
    x: np.ndarray
    values: np.ndarray
    error_estimate: np.ndarray
    q0: float
    u_end: float
    envelope: float
    imag_residual: float
    diagnostics: dict = field(default_factory=dict)


class _TransformSampler:
    """Samples G(u, x) = p^S(q0 + iu, x) / (q0 + iu) along increasing u."""

    def __init__(self, model, q0: float, x_grid: np.ndarray, params: InversionParams):
        self.model = model
        self.q0 = q0
        self.x = x_grid
        self.params = params
        grid = solve_real_q(model, q0, params.N)
        self.N = grid.N
        start = np.concatenate(([grid.zeta0_minus], grid.zeta_neg))
        self.tracker = RootTracker(model, q0, start)

    def value(self, u: float) -> np.ndarray:
        zetas = self.tracker.advance(u)
        q = self.q0 + 1j * u
        grid = RootGrid(
            model=self.model, q=q if u > 0 else self.q0, N=self.N,
            zeta0_minus=zetas[0], zeta0_plus=None, zeta_pos=None, zeta_neg=zetas[1:],
        )
        factor = FactorProduct.from_grid(self.model, grid, "plus")
        mixture = _mixture_from_factor(factor, self.params.K, extrapolate=False)
        law = SupDensity(
            atom=0.0, rates=mixture.rates, coefficients=mixture.coefficients, K=mixture.K,
            tail_mass=mixture.tail_mass, tail_rate=mixture.tail_rate, q=grid.q,
        )
        return law.density(self.x) / q

    def panel(self, u0: float, u1: float, h: float) -> tuple[np.ndarray, np.ndarray]:
        count = int(round((u1 - u0) / h))
        count += count % 2
        u = np.linspace(u0, u1, count + 1)
        return u, np.array([self.value(v) for v in u])


def _endpoint_tail(u: np.ndarray, samples: np.ndarray, t_arr: np.ndarray):
    """Tails int_U^inf of Re G cos(tu) and Im G sin(tu) past the last sample U.

    Two terms of integration by parts, e^{itU} [-f/(it) + f'/(it)^2], with
    one-sided differences for f' and f''. The third term, |f''| / t^3, bounds the
    remainder for each t.
    """
    h = u[1] - u[0]
    U = u[-1]
    g0 = samples[-1]
    g1 = (3 * samples[-1] - 4 * samples[-2] + samples[-3]) / (2 * h)
    g2 = (2 * samples[-1] - 5 * samples[-2] + 4 * samples[-3] - samples[-4]) / h**2
    tail_cos = np.empty((len(t_arr), samples.shape[1]))
    tail_sin = np.empty_like(tail_cos)
    for i, t in enumerate(t_arr):
        it = 1j * t
        phase = np.exp(it * U)
        tail_cos[i] = np.real(phase * (-g0.real / it + g1.real / it**2))
        tail_sin[i] = np.imag(phase * (-g0.imag / it + g1.imag / it**2))
    remainder = float(np.max(np.abs(g2))) / t_arr**3
    return tail_cos, tail_sin, remainder


def _invert(model, t_list, x_grid, params: InversionParams) -> list[FixedTimeDensity]:
    t_arr = np.asarray(t_list, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("t > 0 required")
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid <= 0):
        raise DomainError("x > 0 required for fixed-horizon densities")
    q0 = params.q0 if params.q0 is not None else 2.0 / float(np.mean(t_arr))
    if not q0 > 0:
        raise DomainError(f"q0 > 0 required, got q0={q0}")

    sampler = _TransformSampler(model, q0, x_grid, params)
    amplification = 2 / math.pi * np.exp(q0 * t_arr)
    cos_acc = np.zeros((len(t_arr), len(x_grid)))
    sin_acc = np.zeros((len(t_arr), len(x_grid)))

    def accumulate(u, samples):
        h = u[1] - u[0]
        for i, t in enumerate(t_arr):
            c, s = filon_cos_sin(samples, u[0], h, t)
            cos_acc[i] += np.real(c)
            sin_acc[i] += np.imag(s)

    u_start = 0.0
    for end, step in params.panels:
        u, samples = sampler.panel(u_start, end, step)
        accumulate(u, samples)
        u_start = end

    # G decays like u^-2 for jump processes, so the stop test is on the tail remainder
    envelope = math.inf
    while True:
        if u_start >= params.u_cap:
            raise TruncationError(
                f"Transform envelope {envelope:.2e} above {params.envelope_tol:g} at u={u_start:g}"
            )
        end = min(u_start + params.chunk, params.u_cap)
        u, samples = sampler.panel(u_start, end, params.tail_step)
        accumulate(u, samples)
        u_start = end
        tail_cos, tail_sin, remainder = _endpoint_tail(u, samples, t_arr)
        envelopes = amplification * remainder
        envelope = float(np.max(envelopes))
        logger.debug(f"Inversion chunk to u={end:g}: |G| {np.max(np.abs(samples[-1])):.2e}, envelope {envelope:.2e}")
        if envelope < params.envelope_tol:
            break

    results = []
    for i, t in enumerate(t_arr):
        scale = 2 / math.pi * math.exp(q0 * t)
        values = scale * (cos_acc[i] + tail_cos[i])
        alternate = -scale * (sin_acc[i] + tail_sin[i])
        gap = float(np.max(np.abs(values - alternate)))
        if gap > params.imag_tol:
            raise AccuracyError(
                f"Cosine and sine inversions differ by {gap:.2e} at t={t:g} (tolerance {params.imag_tol:g})"
            )
        results.append(FixedTimeDensity(
            t=float(t), x=x_grid, values=values,
            error_estimate=np.abs(values - alternate) + envelopes[i],
            q0=q0, u_end=u_start, envelope=envelope, imag_residual=gap,
        ))
    logger.info(f"Inverted {len(t_arr)} horizon(s) on {len(x_grid)} x-values, q0={q0:.4g}, u_end={u_start:g}")
    return results


def sup_density_fixed_t(model, t: float, x_grid, q0: float | None = None,
                        params: InversionParams | None = None) -> FixedTimeDensity:
    """Density of S_t = sup_{s <= t} X_s from the cosine transform along q0 + iu.

    Raises:
        TruncationError: If the transform has not decayed by ``params.u_cap``
        AccuracyError: If the cosine and sine forms disagree beyond ``imag_tol``
    """
    params = params or InversionParams()
    if q0 is not None:
        params = replace(params, q0=q0)
    elif params.q0 is None:
        params = replace(params, q0=2.0 / t)
    return _invert(model, [t], x_grid, params)[0]


def sup_density_fixed_t_grid(model, t_list, x_grid, params: InversionParams | None = None) -> list[FixedTimeDensity]:
    """Fixed-horizon densities for several t sharing one set of transform samples."""
    return _invert(model, t_list, x_grid, params or InversionParams())
