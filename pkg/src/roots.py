"""Roots of q + Psi(i zeta) = 0.

For real q every root is real and simple, and the roots interlace with the
poles of Psi(i zeta). The positive half-line is solved directly; the
negative half-line is the positive half-line of the mirrored model.

Asymptotically the roots follow one or more "strands"
(``LatticeStrand``): zeta_j ~ s (j + b + sum_i A_i (j + b)^{p_i}) next to
poles s (j + a). The strands give Newton seeds here and tail corrections
in ``wh_factors``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.integrate import solve_ivp

from .errors import (
    CollisionError,
    ConvergenceError,
    DomainError,
    RegimeError,
    StiffnessError,
)
from .models import (
    INTEGER_LAMBDA_TOL,
    BetaFamilyModel,
    SechPoissonModel,
    SinhSquareModel,
)

logger = logging.getLogger(__name__)

N_MIN = 5
RESIDUAL_TOL = 1e-10
COLLISION_TOL = 1e-6
MAX_NEWTON_ITER = 100

# brackets are shrunk by this fraction of their width before sign checks
_SHRINK = 1e-11
# doubling search for zeta_0^+ when the half-line has no poles
_UNBOUNDED_START = 1.0
_UNBOUNDED_LIMIT = 1e8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LatticeStrand:
    """One asymptotic sub-lattice of poles and roots on the positive half-line.

    Poles P_j = scale (j + pole_offset), roots
    zeta_j ~ scale (u + sum A u^p) with u = j + root_offset, j = 0, 1, ...
    All correction powers p are negative.
    """

    scale: float
    pole_offset: complex
    root_offset: complex
    corrections: tuple = ()

    def pole(self, j):
        return self.scale * (np.asarray(j) + self.pole_offset)

    def root(self, j):
        u = np.asarray(j) + self.root_offset
        total = u + sum(A * u**p for A, p in self.corrections)
        return self.scale * total

    def root_derivative(self, j):
        u = np.asarray(j) + self.root_offset
        return self.scale * (1.0 + sum(A * p * u ** (p - 1) for A, p in self.corrections))

    def with_corrections(self, extra: tuple) -> "LatticeStrand":
        return LatticeStrand(self.scale, self.pole_offset, self.root_offset, self.corrections + tuple(extra))


def _is_complex(q) -> bool:
    return bool(np.iscomplexobj(q) and np.imag(q) != 0)


def _sech_strands(model: SechPoissonModel, q) -> list[LatticeStrand]:
    eta = model.eta(q)
    a = model.alpha
    # odd n: poles a + 4j + 1, roots a + 4j + 4 - eta; even n: poles a + 4j + 3, roots a + 4j + 4 + eta
    return [
        LatticeStrand(4.0, (a + 1) / 4, (a + 4 - eta) / 4),
        LatticeStrand(4.0, (a + 3) / 4, (a + 4 + eta) / 4),
    ]


def _sinh_strands(model: SinhSquareModel, q) -> list[LatticeStrand]:
    alpha, sigma = model.alpha, model.sigma
    rho, gamma = model.rho_c, model.gamma_c
    offset = 1.0 + alpha
    if sigma > 0:
        s8 = 8.0 / sigma**2
        a2 = -s8 * (2 * rho / sigma**2 + alpha)
        return [LatticeStrand(1.0, offset, offset, ((s8, -1.0), (a2, -2.0)))]

    omega0 = (math.pi / 2 - math.atan(rho / (4 * math.pi))) / math.pi
    c0 = -4 * (4 * gamma - q + alpha * rho) / (16 * math.pi**2 + rho**2)
    a2 = alpha * c0 + rho * c0**2 / 4
    return [LatticeStrand(1.0, offset, offset + omega0, ((c0, -1.0), (a2, -2.0)))]


def _near(value: float, target: float) -> bool:
    return abs(value - target) < INTEGER_LAMBDA_TOL


def _beta_sigma0_coefficients(model: BetaFamilyModel) -> tuple[float, float, float]:
    """(omega0, A, power) of the sigma = 0 expansion zeta ~ beta2 (n + alpha2 + omega0) + A (.)^power.

    Raises:
        RegimeError: For lambda1 = 2, lambda2 = 2, or a vanishing rho where it divides
    """
    l1, l2 = model.lambda1, model.lambda2
    c1, c2 = model.c1, model.c2
    b1, b2 = model.beta1, model.beta2
    rho = model.rho_c
    if c1 == 0:
        # without positive jumps the drift term dominates, as for lambda1 < 2
        l1 = 0.0
    if _near(l1, 2) or _near(l2, 2):
        raise RegimeError(
            f"sigma = 0 with lambda1={l1}, lambda2={l2}: no root expansion for lambda = 2"
        )
    gamma = special.gamma
    sin_l2 = math.sin(math.pi * l2)

    if l1 < 2:
        if l2 < 2:
            if rho == 0:
                raise RegimeError("sigma = 0, lambda1, lambda2 < 2 and rho = 0: expansion undefined")
            return 0.0, c2 / (rho * b2 * gamma(l2)), l2 - 2
        return 2 - l2, -sin_l2 * b2**3 * rho / (math.pi * c2 * gamma(1 - l2)), 2 - l2

    if _near(l1, l2):
        ratio = c1 * b2**l2 * gamma(1 - l1) / (c2 * b1**l1 * gamma(1 - l2))
        x0 = math.atan(sin_l2 / (ratio - math.cos(math.pi * l2))) / math.pi
        amp = -rho * math.sin(math.pi * x0) ** 2 / math.pi**2 * b2**3 / c2 * gamma(l2)
        return x0, amp, 2 - l2
    if l2 < l1:
        amp = c2 * b1**l1 / (c1 * b2 ** (l1 - 1) * gamma(1 - l1) * gamma(l2))
        return 0.0, amp, l2 - l1
    amp = -(sin_l2 / math.pi) * c1 * b2 ** (l1 + 1) * gamma(1 - l1) / (c2 * b1**l1 * gamma(1 - l2))
    return 2 - l2, amp, l1 - l2


def _beta_strands(model: BetaFamilyModel, q) -> list[LatticeStrand]:
    if model.c2 == 0:
        return []
    b2, a2 = model.beta2, model.alpha2
    if model.sigma > 0:
        amp = 2 * model.c2 / (model.sigma**2 * b2**3 * special.gamma(model.lambda2))
        return [LatticeStrand(b2, a2, a2, ((amp, model.lambda2 - 3),))]

    omega0, amp, power = _beta_sigma0_coefficients(model)
    frac = omega0 - math.floor(omega0)
    if frac < 1e-12 or frac > 1 - 1e-12:
        # root sits next to the lower pole when the correction is positive
        frac = 0.0 if amp > 0 else 1.0
    return [LatticeStrand(b2, a2, a2 + frac, ((amp / b2, power),))]


def positive_strands(model, q) -> list[LatticeStrand]:
    """Asymptotic strands of the positive roots of q + Psi(i zeta) = 0.

    Several strands are interleaved: root n >= 1 belongs to strand
    (n - 1) % len(strands) with index j = (n - 1) // len(strands). The list is
    empty when the half-line has no poles (beta family without negative jumps).

    Raises:
        RegimeError: When no expansion is available for the model's regime
    """
    if isinstance(model, SechPoissonModel):
        return _sech_strands(model, q)
    if isinstance(model, SinhSquareModel):
        return _sinh_strands(model, q)
    if isinstance(model, BetaFamilyModel):
        return _beta_strands(model, q)
    raise DomainError(f"Unsupported model type: {type(model).__name__}")


def strand_roots(strands: list[LatticeStrand], count: int) -> np.ndarray:
    """Asymptotic values of roots 1..count from interleaved strands."""
    n = np.arange(1, count + 1)
    m = len(strands)
    if m == 0 and count > 0:
        raise DomainError("No root strands: this half-line has no roots beyond zeta_0")
    out = np.empty(count, dtype=complex)
    for k, strand in enumerate(strands):
        sel = (n - 1) % m == k
        out[sel] = strand.root((n[sel] - 1) // m)
    return out


def _check_q(model, q) -> None:
    if _is_complex(q):
        if np.real(q) <= 0:
            raise DomainError(f"Re q > 0 required for complex q, got q={q}")
        return
    q = float(np.real(q))
    if not math.isfinite(q) or q < 0:
        raise DomainError(f"q >= 0 required, got q={q}")
    if q == 0 and not model.mean() < 0:
        raise DomainError(
            f"q = 0 requires a negative mean E X_1 < 0, got mean={model.mean():.6g}"
        )


@dataclass
class Localization:
    """Localization intervals; index 0 of each side is zeta_0^+ or zeta_0^-."""

    pos_lo: np.ndarray
    pos_hi: np.ndarray
    neg_lo: np.ndarray
    neg_hi: np.ndarray

    def intervals(self) -> list[tuple[str, float, float]]:
        """All intervals in increasing order with their root labels."""
        n_pos = len(self.pos_lo) - 1
        n_neg = len(self.neg_lo) - 1
        out = [(str(-n), self.neg_lo[n], self.neg_hi[n]) for n in range(n_neg, 0, -1)]
        out.append(("-0", self.neg_lo[0], self.neg_hi[0]))
        out.append(("+0", self.pos_lo[0], self.pos_hi[0]))
        out.extend((str(n), self.pos_lo[n], self.pos_hi[n]) for n in range(1, n_pos + 1))
        return out


def localize(model, q, N: int) -> Localization:
    """Localization intervals of zeta_0^-, zeta_0^+ and zeta_{+-1..+-N}.

    Raises:
        DomainError: For q < 0, or q = 0 without a negative mean
    """
    _check_q(model, q)
    if N < 1:
        raise DomainError(f"N >= 1 required, got N={N}")
    lo, hi = model.positive_brackets(N)
    mlo, mhi = model.mirror().positive_brackets(N)
    return Localization(pos_lo=lo, pos_hi=hi, neg_lo=-mhi, neg_hi=-mlo)


def asymptotic_root(model, n: int, q, n_min: int = N_MIN):
    """Asymptotic approximation of zeta_n (|n| >= n_min), used as a Newton seed.

    Values that land outside the localization interval of n are shifted by
    one lattice spacing, or replaced by the interval midpoint.

    Raises:
        DomainError: If |n| < n_min or the regime has no expansion
    """
    if abs(n) < n_min:
        raise DomainError(f"asymptotic_root needs |n| >= {n_min}, got n={n}")
    if n < 0:
        return -asymptotic_root(model.mirror(), -n, q, n_min)

    value = strand_roots(positive_strands(model, q), n)[-1]
    if _is_complex(q):
        return complex(value)
    value = float(value.real)
    lo, hi = model.positive_brackets(n)
    lo, hi = lo[n], hi[n]
    if lo < value < hi:
        return value
    spacing = hi - lo
    for shifted in (value + spacing, value - spacing):
        if lo < shifted < hi:
            return shifted
    return 0.5 * (lo + hi)


@dataclass
class RootGrid:
    """Roots of q + Psi(i zeta) = 0 for one q.

    ``zeta_pos[n-1]`` is zeta_n and ``zeta_neg[n-1]`` is zeta_{-n}; a beta-family
    side without jumps has no roots beyond zeta_0, so these may be shorter than N.
    ``residuals_*`` are scaled, |q + Psi(i zeta)| / (1 + |q| + |zeta Psi'(i zeta)|),
    and ``abs_residuals_*`` are |q + Psi(i zeta)|, both with index 0 for zeta_0.
    Complex q (continuation) gives complex roots and no localization; a side
    that was not continued is None.
    """

    model: object
    q: complex
    N: int
    zeta0_minus: complex | None
    zeta0_plus: complex | None
    zeta_pos: np.ndarray | None
    zeta_neg: np.ndarray | None
    residuals_pos: np.ndarray | None = None
    residuals_neg: np.ndarray | None = None
    abs_residuals_pos: np.ndarray | None = None
    abs_residuals_neg: np.ndarray | None = None
    localization: Localization | None = None

    def positive_side(self) -> tuple[complex, np.ndarray]:
        """(zeta_0^+, zeta_1..N): roots seen by phi^-."""
        if self.zeta_pos is None:
            raise DomainError("Root grid has no positive roots")
        return self.zeta0_plus, self.zeta_pos

    def negative_side(self) -> tuple[complex, np.ndarray]:
        """(-zeta_0^-, -zeta_{-1..-N}): roots seen by phi^+, in positive coordinates."""
        if self.zeta_neg is None:
            raise DomainError("Root grid has no negative roots")
        return -self.zeta0_minus, -self.zeta_neg

    @staticmethod
    def _max(*parts) -> float:
        present = [r for r in parts if r is not None]
        return float(max(np.max(r) for r in present)) if present else 0.0

    def max_residual(self) -> float:
        return self._max(self.residuals_pos, self.residuals_neg)

    def max_abs_residual(self) -> float:
        return self._max(self.abs_residuals_pos, self.abs_residuals_neg)

    def rows(self) -> list[dict]:
        """One row per root, increasing in zeta (real grids only)."""
        intervals = self.localization.intervals() if self.localization else None
        zetas = np.concatenate((self.zeta_neg[::-1], [self.zeta0_minus, self.zeta0_plus], self.zeta_pos))

        def ordered(neg, pos):
            return np.concatenate((neg[1:][::-1], neg[:1], pos[:1], pos[1:]))

        scaled = ordered(self.residuals_neg, self.residuals_pos)
        absolute = ordered(self.abs_residuals_neg, self.abs_residuals_pos)
        rows = []
        for i, zeta in enumerate(zetas):
            label, lo, hi = intervals[i] if intervals else ("", np.nan, np.nan)
            rows.append({"n": label, "zeta": float(np.real(zeta)), "residual": float(absolute[i]),
                         "interval_lo": float(lo), "interval_hi": float(hi),
                         "scaled_residual": float(scaled[i])})
        return rows

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "q": [float(np.real(self.q)), float(np.imag(self.q))],
            "N": self.N,
            "max_residual": self.max_residual(),
            "max_abs_residual": self.max_abs_residual(),
        }


def _f_and_fprime(model, q, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    iz = 1j * x
    f = q + model.psi(iz)
    fp = 1j * model.psi_prime(iz)
    return np.real(f), np.real(fp)


def root_residuals(model, q, zeta) -> tuple[np.ndarray, np.ndarray]:
    """(scaled, absolute) residuals of q + Psi(i zeta) at the given roots.

    The absolute residual of a correctly rounded root is about
    eps |zeta Psi'(i zeta)|, so the scaled form is the convergence test.
    """
    iz = 1j * np.asarray(zeta)
    absolute = np.abs(q + model.psi(iz))
    fp = model.psi_prime(iz)
    return absolute / (1.0 + abs(q) + np.abs(iz * fp)), absolute


def _upper_bracket(model, q: float) -> float:
    """Right end of a sign change for zeta_0^+ on a half-line without poles."""
    f0, _ = _f_and_fprime(model, q, np.array([_UNBOUNDED_START * 1e-6]))
    hi = _UNBOUNDED_START
    while hi <= _UNBOUNDED_LIMIT:
        fh, _ = _f_and_fprime(model, q, np.array([hi]))
        if np.sign(fh[0]) != np.sign(f0[0]):
            return hi
        hi *= 2.0
    raise RegimeError(
        f"q + Psi(i zeta) keeps its sign up to zeta={_UNBOUNDED_LIMIT:g}: "
        "the process has no downward movement on this side"
    )


def _bisect(model, q, a, b, fa_sign, steps: int):
    for _ in range(steps):
        mid = 0.5 * (a + b)
        fm, _ = _f_and_fprime(model, q, mid)
        same = np.sign(fm) == fa_sign
        a = np.where(same, mid, a)
        b = np.where(same, b, mid)
    return a, b


def _solve_half_line(model, q: float, N: int, n_min: int, bisect_only: bool = False):
    """Roots zeta_0^+, zeta_1..N of the positive half-line with scaled and absolute residuals."""
    lo, hi = model.positive_brackets(N)
    zero_root = q == 0 and model.mean() < 0
    if not np.isfinite(hi[0]):
        hi = hi.copy()
        hi[0] = 1.0 if zero_root else _upper_bracket(model, q)
    # 1e-11 of the width drops below an ulp of zeta for large n
    pad = np.maximum(_SHRINK * (hi - lo), 8 * _EPS * np.abs(lo))
    a = lo + pad
    b = hi - pad
    count = len(lo)
    roots = np.empty(count)
    todo = np.arange(count)
    if zero_root:
        # negative mean: zeta_0^+ = 0 exactly
        roots[0] = 0.0
        todo = todo[1:]

    a, b = a[todo], b[todo]
    fa, _ = _f_and_fprime(model, q, a)
    fb, _ = _f_and_fprime(model, q, b)
    sa = np.sign(fa)
    no_change = sa == np.sign(fb)
    if np.any(no_change):
        index = int(todo[np.argmax(no_change)])
        raise ConvergenceError(
            f"No sign change of q + Psi(i zeta) in the localization interval of root {index}",
            index=index,
        )

    if bisect_only:
        if todo.size:
            steps = int(np.ceil(np.log2(np.max(b - a) / (_EPS * max(1.0, np.max(np.abs(b)))))) + 2)
            a, b = _bisect(model, q, a, b, sa, steps)
            roots[todo] = 0.5 * (a + b)
        return (roots, *root_residuals(model, q, roots))

    x = 0.5 * (a + b)
    small = todo < n_min
    if np.any(small):
        # pre-bracket to 1e-3 of the interval width
        a_s, b_s = _bisect(model, q, a[small], b[small], sa[small], 10)
        a[small], b[small] = a_s, b_s
        x[small] = 0.5 * (a_s + b_s)
    large = ~small
    if np.any(large):
        try:
            seeds = strand_roots(positive_strands(model, q), count - 1)[todo[large] - 1].real
            inside = (seeds > a[large]) & (seeds < b[large])
            x[large] = np.where(inside, seeds, x[large])
        except DomainError as e:
            logger.debug(f"No asymptotic seeds ({e}); using interval midpoints")

    active = np.ones(len(todo), dtype=bool)
    for _ in range(MAX_NEWTON_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        fx, fpx = _f_and_fprime(model, q, xa)
        same = np.sign(fx) == sa[idx]
        a[idx] = np.where(same, xa, a[idx])
        b[idx] = np.where(same, b[idx], xa)
        with np.errstate(all="ignore"):
            x_new = xa - fx / fpx
        outside = ~np.isfinite(x_new) | (x_new <= a[idx]) | (x_new >= b[idx])
        x_new = np.where(outside, 0.5 * (a[idx] + b[idx]), x_new)
        scale = np.maximum(1.0, np.abs(xa))
        done = (
            (fx == 0)
            | (np.abs(x_new - xa) <= 4 * _EPS * scale)
            | (b[idx] - a[idx] <= 4 * _EPS * scale)
        )
        x[idx] = np.where(fx == 0, xa, x_new)
        active[idx[done]] = False

    roots[todo] = x
    residuals, absolute = root_residuals(model, q, roots)
    failed = residuals[todo] > RESIDUAL_TOL
    if np.any(failed):
        index = int(todo[np.argmax(failed)])
        raise ConvergenceError(
            f"Root {index} did not converge: scaled residual {residuals[index]:.2e}",
            index=index,
        )
    return roots, residuals, absolute


def _assemble(model, q, N, pos, neg) -> RootGrid:
    pos_roots, res_pos, abs_pos = pos
    neg_roots, res_neg, abs_neg = neg
    return RootGrid(
        model=model, q=q, N=N,
        zeta0_minus=-neg_roots[0], zeta0_plus=pos_roots[0],
        zeta_pos=pos_roots[1:], zeta_neg=-neg_roots[1:],
        residuals_pos=res_pos, residuals_neg=res_neg,
        abs_residuals_pos=abs_pos, abs_residuals_neg=abs_neg,
        localization=localize(model, q, N),
    )


def solve_real_q(model, q: float, N: int, n_min: int = N_MIN) -> RootGrid:
    """Solve q + Psi(i zeta) = 0 for zeta_0^+-, zeta_{+-1..+-N} at real q.

    Small |n| are pre-bracketed by bisection; larger |n| start Newton from the
    asymptotic expansion. Newton steps that leave the bracket fall back to
    bisection.

    Raises:
        DomainError: For invalid q (see ``localize``)
        RegimeError: For a side without poles where zeta_0 does not exist
        ConvergenceError: If a root fails to converge (``index`` names it)
    """
    _check_q(model, q)
    if _is_complex(q):
        raise DomainError(f"solve_real_q needs real q, got q={q}")
    q = float(np.real(q))
    pos = _solve_half_line(model, q, N, n_min)
    neg = _solve_half_line(model.mirror(), q, N, n_min)
    grid = _assemble(model, q, N, pos, neg)
    logger.info(
        f"Solved {len(grid.zeta_pos) + len(grid.zeta_neg) + 2} roots for {model.family} at q={q}: "
        f"zeta0- = {grid.zeta0_minus:.12g}, zeta0+ = {grid.zeta0_plus:.12g}, "
        f"max residual {grid.max_residual():.1e} (absolute {grid.max_abs_residual():.1e})"
    )
    return grid


def half_line_roots(model, q: float, N: int, n_min: int = N_MIN) -> tuple[float, np.ndarray]:
    """(zeta_0^+, zeta_1..N) of one model, without the mirrored side.

    Factor evaluation only needs one half-line: phi^- uses ``model`` and
    phi^+ uses ``model.mirror()``.
    """
    if _is_complex(q) or not float(np.real(q)) >= 0:
        raise DomainError(f"Real q >= 0 required, got q={q}")
    if q == 0 and model.mean() == 0:
        raise DomainError("q = 0 requires a nonzero mean")
    roots, _, _ = _solve_half_line(model, float(np.real(q)), N, n_min)
    return float(roots[0]), roots[1:]


def bisection_roots(model, q: float, N: int) -> RootGrid:
    """Bisection-only root grid (independent oracle for ``solve_real_q``)."""
    _check_q(model, q)
    q = float(np.real(q))
    pos = _solve_half_line(model, q, N, 0, bisect_only=True)
    neg = _solve_half_line(model.mirror(), q, N, 0, bisect_only=True)
    return _assemble(model, q, N, pos, neg)


def _require_sinh_alpha(model) -> None:
    if not isinstance(model, SinhSquareModel):
        raise DomainError(f"Inverse power sums are defined for the sinh model, got {model.family}")
    if model.alpha == 0:
        raise DomainError("Inverse power sums need alpha != 0")


def omega_direct(grid: RootGrid, model, m: int) -> float:
    """Omega_m = alpha^{-m-1} + sum over all roots of zeta^{-m-1}, summed directly.

    The tail beyond N is the Euler-Maclaurin estimate (integral, half term,
    derivative term) of the same sum over the asymptotic root expansion.

    Raises:
        DomainError: For a non-sinh model, alpha = 0, m < 0 or complex q
    """
    _require_sinh_alpha(model)
    if m < 0:
        raise DomainError(f"m >= 0 required, got m={m}")
    if _is_complex(grid.q):
        raise DomainError("omega_direct needs a real-q grid")
    p = -(m + 1)
    q = float(np.real(grid.q))
    total = model.alpha**p + grid.zeta0_minus**p + grid.zeta0_plus**p
    total += float(np.sum(grid.zeta_pos**p) + np.sum(grid.zeta_neg**p))

    pos = positive_strands(model, q)[0]
    neg = positive_strands(model.mirror(), q)[0]

    def g(n):
        j = n - 1
        return float(np.real(pos.root(j) ** p + (-neg.root(j)) ** p))

    def g_prime(n):
        j = n - 1
        zp, zn = pos.root(j), -neg.root(j)
        return float(np.real(p * zp ** (p - 1) * pos.root_derivative(j)
                             - p * zn ** (p - 1) * neg.root_derivative(j)))

    start = grid.N + 1
    integral, err = integrate.quad(g, start, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    tail = integral + 0.5 * g(start) - g_prime(start) / 12.0
    logger.debug(f"omega_direct m={m}: tail {tail:.3e} (quadrature error {err:.1e})")
    return total + tail


def omega_coefficients(model: SinhSquareModel, q: float, count: int) -> list[float]:
    """Maclaurin coefficients b_0..b_{count-1} of the entire function with zeros alpha and all roots."""
    alpha, sigma = model.alpha, model.sigma
    gamma, rho = model.gamma_c, model.rho_c
    pi = math.pi
    b = []
    for k in range(count):
        n = k // 2
        if k % 2 == 0:
            bracket = n * (2 * n - 1) * alpha * sigma**2 + pi**2 * alpha * (q + 8 * n) - 2 * n * gamma * rho
            b.append((-1) ** (n - 1) * pi ** (2 * n - 1) / math.factorial(2 * n) * bracket)
        else:
            bracket = (
                n * (2 * n + 1) * gamma * sigma**2 / pi
                - pi * (4 * pi**2 * alpha**2 + 4 * gamma**2 - gamma * q)
                + pi * (2 * n + 1) * (4 * gamma + alpha * rho)
            )
            b.append((-1) ** n * pi ** (2 * n) / math.factorial(2 * n + 1) * bracket)
    return b


def omega_recurrence(model, q: float, m_max: int) -> list[float]:
    """Omega_0..Omega_{m_max} from the Newton-identity recurrence on b_n.

    Omega_m = -(1/b_0) [(m + 1) b_{m+1} + sum_{n<m} Omega_n b_{m-n}]

    Raises:
        DomainError: For a non-sinh model, alpha = 0 or q <= 0
    """
    _require_sinh_alpha(model)
    if not q > 0:
        raise DomainError(f"q > 0 required, got q={q}")
    b = omega_coefficients(model, q, m_max + 2)
    omegas: list[float] = []
    for m in range(m_max + 1):
        acc = (m + 1) * b[m + 1] + sum(omegas[n] * b[m - n] for n in range(m))
        omegas.append(-acc / b[0])
    return omegas


@dataclass
class ContinuationOptions:
    """Step control for root-path continuation."""

    du: float = 0.5
    rtol: float = 1e-8
    atol: float = 1e-12
    newton_steps: int = 8
    collision_tol: float = COLLISION_TOL


class RootTracker:
    """Follows roots of (q0 + iu) + Psi(i zeta) = 0 as u increases.

    Between target values of u the ODE d zeta/du = -1/Psi'(i zeta) is
    integrated with an embedded Runge-Kutta 4(5) pair, then every root is
    polished by Newton steps and the pairwise distances are checked.
    """

    def __init__(self, model, q0: float, zetas: np.ndarray, options: ContinuationOptions | None = None):
        self.model = model
        self.q0 = float(q0)
        self.u = 0.0
        self.zetas = np.asarray(zetas, dtype=complex).copy()
        self.options = options or ContinuationOptions()

    def _rhs(self, u, y):
        return -1.0 / self.model.psi_prime(1j * y)

    def residuals(self) -> np.ndarray:
        return root_residuals(self.model, self.q0 + 1j * self.u, self.zetas)[0]

    def abs_residuals(self) -> np.ndarray:
        return root_residuals(self.model, self.q0 + 1j * self.u, self.zetas)[1]

    def _polish(self, zetas: np.ndarray, q: complex, u: float) -> np.ndarray:
        """Newton steps on the roots still above RESIDUAL_TOL, at most ``newton_steps`` rounds.

        Raises:
            ConvergenceError: If a root is still above RESIDUAL_TOL afterwards
        """
        zetas = zetas.copy()
        residuals, _ = root_residuals(self.model, q, zetas)
        for _ in range(self.options.newton_steps):
            todo = residuals > RESIDUAL_TOL
            if not np.any(todo):
                return zetas
            iz = 1j * zetas[todo]
            f = q + self.model.psi(iz)
            fp = 1j * self.model.psi_prime(iz)
            zetas[todo] = zetas[todo] - f / fp
            residuals[todo], _ = root_residuals(self.model, q, zetas[todo])
        if np.any(residuals > RESIDUAL_TOL):
            index = int(np.argmax(residuals))
            raise ConvergenceError(
                f"Newton correction failed at u={u:.6g}: residual {residuals[index]:.2e} "
                f"after {self.options.newton_steps} steps",
                index=index,
            )
        return zetas

    def _check_collisions(self) -> None:
        z = self.zetas
        if z.size < 2:
            return
        dist = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < self.options.collision_tol:
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            raise CollisionError(
                f"Root paths {i} and {j} within {dist.min():.2e} at u={self.u:.6g}"
            )

    def advance(self, u_next: float) -> np.ndarray:
        """Move all roots to u_next and return them."""
        if u_next <= self.u:
            return self.zetas
        opts = self.options
        sol = solve_ivp(self._rhs, (self.u, u_next), self.zetas, method="RK45",
                        rtol=opts.rtol, atol=opts.atol)
        if sol.status != 0:
            raise StiffnessError(f"Path integration failed at u={self.u:.6g}: {sol.message}")
        self.u = u_next
        self.zetas = self._polish(sol.y[:, -1], self.q0 + 1j * u_next, u_next)
        self._check_collisions()
        return self.zetas


@dataclass
class ComplexRootPath:
    """Root paths zeta_n(u) for q = q0 + iu on a u-grid.

    ``paths[k, r]`` is root ``labels[r]`` at ``u_grid[k]``; ``residuals`` are
    scaled and ``abs_residuals`` absolute, as in ``RootGrid``.
    """

    model: object
    q0: float
    N: int
    u_grid: np.ndarray
    labels: list[str]
    paths: np.ndarray
    residuals: np.ndarray = field(repr=False)
    abs_residuals: np.ndarray | None = field(default=None, repr=False)

    def grid_at(self, k: int) -> RootGrid:
        lookup = dict(zip(self.labels, self.paths[k]))
        neg = [v for label, v in zip(self.labels, self.paths[k]) if label.startswith("-") and label != "-0"]
        pos = [v for label, v in zip(self.labels, self.paths[k]) if not label.startswith(("-", "+"))]
        return RootGrid(
            model=self.model, q=self.q0 + 1j * self.u_grid[k], N=self.N,
            zeta0_minus=lookup.get("-0"), zeta0_plus=lookup.get("+0"),
            zeta_pos=np.array(pos, dtype=complex) if "+0" in lookup else None,
            zeta_neg=np.array(neg, dtype=complex) if "-0" in lookup else None,
        )

    def rows(self) -> list[dict]:
        absolute = self.abs_residuals if self.abs_residuals is not None else np.full(self.residuals.shape, np.nan)
        out = []
        for k, u in enumerate(self.u_grid):
            for r, label in enumerate(self.labels):
                z = self.paths[k, r]
                out.append({"n": label, "u": float(u), "zeta_re": float(z.real),
                            "zeta_im": float(z.imag), "residual": float(absolute[k, r]),
                            "scaled_residual": float(self.residuals[k, r])})
        return out


def _initial_roots(grid: RootGrid, sides: tuple[str, ...]) -> tuple[list[str], np.ndarray]:
    labels: list[str] = []
    values: list[complex] = []
    if "negative" in sides:
        labels += ["-0"] + [str(-n) for n in range(1, len(grid.zeta_neg) + 1)]
        values += [grid.zeta0_minus] + list(grid.zeta_neg)
    if "positive" in sides:
        labels += ["+0"] + [str(n) for n in range(1, len(grid.zeta_pos) + 1)]
        values += [grid.zeta0_plus] + list(grid.zeta_pos)
    return labels, np.array(values, dtype=complex)


def continue_complex_q(
    model,
    grid: RootGrid,
    u_max: float,
    step_control: ContinuationOptions | None = None,
    u_grid: np.ndarray | None = None,
    sides: tuple[str, ...] = ("negative", "positive"),
) -> ComplexRootPath:
    """Continue the real-q root grid along q = q0 + iu, 0 <= u <= u_max.

    Args:
        model: Process model of ``grid``
        grid: Real-q root grid at q0
        u_max: End of the path
        step_control: Output spacing and integrator/Newton/collision settings
        u_grid: Explicit increasing u values starting at 0 (overrides spacing)
        sides: Which half-lines to continue ("negative" feeds phi^+)

    Returns:
        ComplexRootPath; the u = 0 row reproduces the input grid exactly

    Raises:
        CollisionError, StiffnessError, ConvergenceError
    """
    if _is_complex(grid.q):
        raise DomainError("continue_complex_q starts from a real-q grid")
    if not u_max > 0:
        raise DomainError(f"u_max > 0 required, got u_max={u_max}")
    options = step_control or ContinuationOptions()
    if u_grid is None:
        count = int(math.ceil(u_max / options.du)) + 1
        u_grid = np.linspace(0.0, u_max, count)
    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid[0] != 0.0 or np.any(np.diff(u_grid) <= 0):
        raise DomainError("u_grid must start at 0 and increase strictly")

    labels, start = _initial_roots(grid, sides)
    tracker = RootTracker(model, float(np.real(grid.q)), start, options)
    paths = np.empty((len(u_grid), len(start)), dtype=complex)
    residuals = np.empty(paths.shape)
    abs_residuals = np.empty(paths.shape)
    paths[0] = start
    residuals[0] = tracker.residuals()
    abs_residuals[0] = tracker.abs_residuals()
    for k in range(1, len(u_grid)):
        paths[k] = tracker.advance(u_grid[k])
        residuals[k] = tracker.residuals()
        abs_residuals[k] = tracker.abs_residuals()

    logger.info(
        f"Continued {len(start)} roots to u={u_grid[-1]:g} "
        f"({len(u_grid)} points, max residual {residuals.max():.1e}, absolute {abs_residuals.max():.1e})"
    )
    return ComplexRootPath(
        model=model, q0=tracker.q0, N=grid.N, u_grid=u_grid,
        labels=labels, paths=paths, residuals=residuals, abs_residuals=abs_residuals,
    )
