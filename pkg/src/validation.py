"""Independent checks of the factorization machinery.

- exact Monte Carlo of the sech compound Poisson supremum
- Kolmogorov distances against computed CDFs
- unaccelerated long products
- a consistency report that runs every cross-check for one model
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DomainError, WienerHopfError
from .models import SechPoissonModel, SinhSquareModel, psi_lk_quadrature
from .roots import omega_direct, omega_recurrence, solve_real_q
from .wh_factors import FactorProduct, phi_closed_sech, phi_closed_sinh_special
from .distributions import sup_density_closed_sech, sup_density_expq

logger = logging.getLogger(__name__)

BLOCK_SIZE = 50_000

FACTORIZATION_TOL = 1e-7
QUADRATURE_TOL = 1e-7
OMEGA_TOL = 1e-6
CLOSED_FORM_TOL = 1e-8
DENSITY_TOL = 1e-6
MASS_TOL = 1e-6
SE_MULTIPLIER = 3.0


@dataclass(frozen=True)
class Horizon:
    """Exponential horizon with rate ``value`` or fixed horizon t = ``value``."""

    kind: str
    value: float

    @classmethod
    def expq(cls, q: float) -> "Horizon":
        return cls("expq", q)

    @classmethod
    def fixed(cls, t: float) -> "Horizon":
        return cls("fixed", t)

    def __post_init__(self):
        if self.kind not in ("expq", "fixed"):
            raise DomainError(f"Horizon kind must be 'expq' or 'fixed', got {self.kind!r}")
        if not self.value > 0:
            raise DomainError(f"Horizon parameter must be > 0, got {self.value}")


@dataclass
class EmpiricalCdf:
    samples: np.ndarray
    n: int
    seed: int

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))
        if self.n < 1 or self.n != len(self.samples):
            raise DomainError(f"EmpiricalCdf needs n >= 1 matching the samples, got n={self.n}")

    def evaluate(self, x):
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.n

    def atom_fraction(self) -> float:
        return float(np.mean(self.samples == 0.0))

    def quantiles(self, levels):
        return np.quantile(self.samples, levels)


def sech_jumps(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """Jump sizes with density e^{alpha x} / (Lambda cosh x).

    V = 1/(1 + e^{-2x}) is Beta((1+alpha)/2, (1-alpha)/2); the upper half is
    drawn through the complementary variable to keep the far tail exact.
    """
    a = (1 + alpha) / 2
    u = rng.random(size)
    out = np.empty(size)
    lower = u <= 0.5
    v = special.betaincinv(a, 1 - a, u[lower])
    out[lower] = 0.5 * np.log(v / (1 - v))
    w = special.betaincinv(1 - a, a, 1 - u[~lower])
    out[~lower] = 0.5 * np.log((1 - w) / w)
    return out


def _running_max(counts: np.ndarray, jumps: np.ndarray) -> np.ndarray:
    # sup over each path of the partial sums of its jumps, floored at 0
    result = np.zeros(len(counts))
    nonempty = counts > 0
    if not np.any(nonempty):
        return result
    starts = np.cumsum(counts) - counts
    cs = np.cumsum(jumps)
    before = np.concatenate(([0.0], cs))[starts]
    within = cs - np.repeat(before, counts)
    maxima = np.maximum.reduceat(within, starts[nonempty])
    result[nonempty] = np.maximum(maxima, 0.0)
    return result


def _simulate_block(model: SechPoissonModel, horizon: Horizon, size: int,
                    seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seq)
    rate = model.jump_rate
    if horizon.kind == "expq":
        tau = rng.exponential(1.0 / horizon.value, size)
        counts = rng.poisson(rate * tau)
    else:
        counts = rng.poisson(rate * horizon.value, size)
    jumps = sech_jumps(rng, model.alpha, int(counts.sum()))
    return _running_max(counts, jumps)


def mc_sup_sech(alpha: float, horizon: Horizon, n_samples: int, seed: int,
                threads: int = 1) -> EmpiricalCdf:
    """Exact simulation of the running supremum of the sech compound Poisson process.

    Samples are generated in blocks with independent child seeds and joined
    in block order, so the result depends on ``seed`` only.
    """
    model = SechPoissonModel(alpha=alpha)
    if n_samples < 1:
        raise DomainError(f"n_samples >= 1 required, got {n_samples}")
    n_blocks = max(1, math.ceil(n_samples / BLOCK_SIZE))
    sizes = [BLOCK_SIZE] * (n_blocks - 1) + [n_samples - BLOCK_SIZE * (n_blocks - 1)]
    seqs = np.random.SeedSequence(seed).spawn(n_blocks)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(lambda args: _simulate_block(model, horizon, *args), zip(sizes, seqs)))

    samples = np.concatenate(blocks)
    logger.info(
        f"Simulated {n_samples} suprema ({horizon.kind}={horizon.value}, alpha={alpha}, seed={seed}): "
        f"atom fraction {np.mean(samples == 0):.4f}"
    )
    return EmpiricalCdf(samples=samples, n=n_samples, seed=seed)


def ks_distance(empirical: EmpiricalCdf, cdf) -> float:
    """sup_x |F_n(x) - F(x)| for a CDF continuous on x > 0 with a possible atom at 0."""
    values, counts = np.unique(empirical.samples, return_counts=True)
    upper = np.cumsum(counts) / empirical.n
    lower = upper - counts / empirical.n
    f_at = np.asarray(cdf(values), dtype=float)
    f_left = np.where(values > 0, f_at, 0.0)
    return float(max(np.max(np.abs(upper - f_at)), np.max(np.abs(lower - f_left))))


def two_sample_ks(a: EmpiricalCdf, b: EmpiricalCdf) -> tuple[float, float]:
    """(statistic, p-value) of the two-sample Kolmogorov-Smirnov test."""
    result = stats.ks_2samp(a.samples, b.samples)
    return float(result.statistic), float(result.pvalue)


def naive_factor_product(model, grid_large, z, N_large: int | None = None, side: str = "minus"):
    """Plain partial product over the first N_large roots (no tail correction)."""
    r0, roots = grid_large.positive_side() if side == "minus" else grid_large.negative_side()
    if N_large is not None:
        if N_large > len(roots):
            raise DomainError(f"Grid has {len(roots)} roots, N_large={N_large} requested")
        roots = roots[:N_large]
    factor = FactorProduct.from_roots(model, grid_large.q, side, r0, roots, accelerate=False)
    return factor(z)


def _entry(check: str, q, value: float, tolerance: float) -> dict:
    value = float(value)
    return {
        "check": check,
        "q": None if q is None else float(q),
        "value": value,
        "tolerance": tolerance,
        "passed": bool(np.isfinite(value) and value <= tolerance),
    }


def _factorization_residual(model, grid, z: np.ndarray) -> float:
    plus = FactorProduct.from_grid(model, grid, "plus")(z)
    minus = FactorProduct.from_grid(model, grid, "minus")(z)
    q = grid.q
    return float(np.max(np.abs(plus * minus * (q + model.psi(z)) / q - 1.0)))


def _model_entries(model, z_grid: np.ndarray) -> list[dict]:
    sample = z_grid[:: max(1, len(z_grid) // 5)]
    deviation = max(
        abs(complex(model.psi(float(z))) - psi_lk_quadrature(model, float(z))) / (1 + abs(complex(model.psi(float(z)))))
        for z in sample
    )
    return [_entry("psi_vs_quadrature", None, deviation, QUADRATURE_TOL)]


def _q_entries(model, q: float, z_grid: np.ndarray, N: int, K: int, inject_fault: bool) -> list[dict]:
    entries = []
    grid = solve_real_q(model, q, N)
    if inject_fault:
        grid.zeta_pos[0] += 1e-3
        logger.warning(f"Injected fault: zeta_1 shifted by 1e-3 at q={q}")

    if q > 0:
        entries.append(_entry("factorization_identity", q, _factorization_residual(model, grid, z_grid), FACTORIZATION_TOL))

    if isinstance(model, SechPoissonModel):
        product = FactorProduct.from_grid(model, grid, "plus")(z_grid)
        closed = phi_closed_sech(model.alpha, q, z_grid, "plus")
        entries.append(_entry("closed_form_vs_product", q, np.max(np.abs(product - closed)), CLOSED_FORM_TOL))
        if q > 0 or model.alpha < 0:
            x = np.array([0.1, 0.5, 1.0, 2.0])
            series = sup_density_expq(model, grid, max(K, N // 2)).density(x)
            exact = sup_density_closed_sech(model.alpha, q, x)
            entries.append(_entry("density_series_vs_closed", q, np.max(np.abs(series - exact)), DENSITY_TOL))

    if isinstance(model, SinhSquareModel):
        if model.alpha == 0 and model.sigma == 0 and q == 4:
            product = FactorProduct.from_grid(model, grid, "plus")(z_grid)
            closed = phi_closed_sinh_special(model.mu, z_grid)
            entries.append(_entry("closed_form_vs_product", q, np.max(np.abs(product - closed)), CLOSED_FORM_TOL))
        if model.alpha != 0 and q > 0:
            direct = [omega_direct(grid, model, m) for m in range(4)]
            recurrence = omega_recurrence(model, q, 3)
            delta = max(abs(d - r) / max(1.0, abs(r)) for d, r in zip(direct, recurrence))
            entries.append(_entry("omega_direct_vs_recurrence", q, delta, OMEGA_TOL))

    dens = sup_density_expq(model, grid, K)
    entries.append(_entry("normalization", q, abs(dens.total_mass() - 1.0), MASS_TOL))
    return entries


def _mc_entries(model: SechPoissonModel, q: float, mc: dict, N: int, K: int) -> tuple[list[dict], EmpiricalCdf]:
    n = int(mc.get("n_samples", 100_000))
    seed = int(mc.get("seed", 0))
    threads = int(mc.get("threads", 1))
    empirical = mc_sup_sech(model.alpha, Horizon.expq(q), n, seed, threads)
    dens = sup_density_expq(model, solve_real_q(model, q, N), K)
    atom = dens.atom
    se = math.sqrt(atom * (1 - atom) / n)
    # 1.95 / sqrt(n) is the 0.1% critical value of the Kolmogorov distribution
    entries = [
        _entry("mc_atom", q, abs(empirical.atom_fraction() - atom) / (SE_MULTIPLIER * se), 1.0),
        _entry("mc_ks", q, ks_distance(empirical, dens.cdf) * math.sqrt(n), 1.95),
    ]
    return entries, empirical


def consistency_report(model, q_list, z_grid, inject_fault: bool = False, mc: dict | None = None,
                       N: int = 200, K: int = 40) -> dict:
    """Run every available cross-check for ``model`` at each q.

    Failures, including numerical exceptions, become report entries with
    ``passed = False``; nothing is raised for a failing check. With ``mc``
    the Monte Carlo samples are returned under ``empirical``, keyed by q,
    so callers can reuse them.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    entries: list[dict] = []
    empirical: dict[float, EmpiricalCdf] = {}
    if len(q_list):
        try:
            entries.extend(_model_entries(model, z_grid))
        except WienerHopfError as e:
            logger.error(f"Quadrature check failed: {e}")
            entries.append({"check": type(e).__name__, "q": None, "value": None,
                            "tolerance": None, "passed": False, "message": str(e)})
    for q in q_list:
        try:
            entries.extend(_q_entries(model, float(q), z_grid, N, K, inject_fault))
            if mc and isinstance(model, SechPoissonModel):
                mc_entries, empirical[float(q)] = _mc_entries(model, float(q), mc, N, K)
                entries.extend(mc_entries)
        except WienerHopfError as e:
            logger.error(f"Check failed at q={q}: {e}")
            entries.append({"check": type(e).__name__, "q": float(q), "value": None,
                            "tolerance": None, "passed": False, "message": str(e)})

    passed = all(e["passed"] for e in entries)
    logger.info(f"Consistency report: {sum(e['passed'] for e in entries)}/{len(entries)} checks passed")
    return {"model": model.to_dict(), "entries": entries, "passed": passed, "empirical": empirical}
