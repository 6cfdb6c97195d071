"""factor: evaluate phi_q^+ and phi_q^- on a grid of real z."""

import logging

import numpy as np

from ..models import SechPoissonModel, SinhSquareModel, build_model
from ..output import write_json, write_result
from ..wh_factors import FactorProduct, phi_closed_sech, phi_closed_sinh_special
from . import require_q, z_grid

logger = logging.getLogger(__name__)

FACTOR_COLUMNS = ["z_re", "z_im", "phi_plus_re", "phi_plus_im", "phi_minus_re", "phi_minus_im"]


def _closed_form(model, q: float, z: np.ndarray):
    if isinstance(model, SechPoissonModel):
        return phi_closed_sech(model.alpha, q, z, "plus")
    if isinstance(model, SinhSquareModel) and model.alpha == 0 and model.sigma == 0 and q == 4:
        return phi_closed_sinh_special(model.mu, z)
    return None


def run(config: dict, output_dir: str, fmt: str = "csv", threads: int = 1) -> dict:
    """Write factor values and, where a closed form exists, a product comparison.

    Returns:
        Dict with the factorization residual and written files
    """
    model = build_model(config)
    q = require_q(config, "factor")
    z = z_grid(config)
    N = int(config["N"])

    plus = FactorProduct.build(model, q, "plus", N=N, use_closed_form=config.get("use_closed_form"))(z)
    minus = None
    residual = None
    if q > 0:
        minus = FactorProduct.build(model, q, "minus", N=N, use_closed_form=config.get("use_closed_form"))(z)
        residual = float(np.max(np.abs(plus * minus * (q + model.psi(z)) / q - 1.0)))
        logger.info(f"Factorization identity residual: {residual:.2e}")

    rows = []
    for i, zi in enumerate(z):
        row = {"z_re": float(zi), "z_im": 0.0,
               "phi_plus_re": plus[i].real, "phi_plus_im": plus[i].imag}
        if minus is not None:
            row["phi_minus_re"] = minus[i].real
            row["phi_minus_im"] = minus[i].imag
        rows.append(row)

    files = write_result(output_dir, "factor", FACTOR_COLUMNS, rows, config,
                         metadata={"factorization_residual": residual}, fmt=fmt)
    result = {"command": "factor", "rows": len(rows), "factorization_residual": residual}

    closed = _closed_form(model, q, z)
    if closed is not None:
        product = FactorProduct.build(model, q, "plus", N=N, use_closed_form=False)(z)
        delta = float(np.max(np.abs(product - closed)))
        path = f"{output_dir}/factor_compare.json"
        write_json(path, {"q": q, "max_abs_difference": delta, "N": N, "points": len(z)})
        files.append(path)
        result["closed_form_difference"] = delta

    result["files"] = files
    return result
