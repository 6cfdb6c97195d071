"""invert: density of the supremum at fixed horizons t."""

import logging

from ..distributions import InversionParams, sup_density_fixed_t_grid
from ..models import build_model
from ..output import write_result
from . import x_grid

logger = logging.getLogger(__name__)

FIXED_T_COLUMNS = ["t", "x", "value", "error_estimate"]


def run(config: dict, output_dir: str, fmt: str = "csv", threads: int = 1) -> dict:
    """Invert the exponential-horizon density along q0 + iu for every t.

    Raises:
        ValueError: If neither t nor t_list is given
    """
    if config.get("t_list"):
        t_list = [float(t) for t in config["t_list"]]
    elif config.get("t") is not None:
        t_list = [float(config["t"])]
    else:
        raise ValueError("Command 'invert' requires t or t_list")

    model = build_model(config)
    x = x_grid(config)
    params = InversionParams(q0=config.get("q0"), N=int(config["N"]), K=int(config["K"]),
                             imag_tol=float(config["imag_tol"]))
    results = sup_density_fixed_t_grid(model, t_list, x, params)

    rows = []
    for res in results:
        rows.extend(
            {"t": res.t, "x": float(xi), "value": float(v), "error_estimate": float(e)}
            for xi, v, e in zip(res.x, res.values, res.error_estimate)
        )
    diagnostics = {
        "q0": results[0].q0,
        "u_end": results[0].u_end,
        "envelope": results[0].envelope,
        "imag_residual": max(r.imag_residual for r in results),
    }
    files = write_result(output_dir, "fixed_t", FIXED_T_COLUMNS, rows, config,
                         metadata=diagnostics, fmt=fmt)
    return {"command": "invert", "rows": len(rows), **diagnostics, "files": files}
