"""roots: solve q + Psi(i zeta) = 0 and optionally continue along q + iu."""

import logging

from ..models import build_model
from ..output import write_result
from ..roots import continue_complex_q, solve_real_q
from . import require_q

logger = logging.getLogger(__name__)

ROOT_COLUMNS = ["n", "zeta", "residual", "interval_lo", "interval_hi", "scaled_residual"]
PATH_COLUMNS = ["n", "u", "zeta_re", "zeta_im", "residual", "scaled_residual"]


def run(config: dict, output_dir: str, fmt: str = "csv", threads: int = 1) -> dict:
    """Solve the root grid and write roots (and root paths with complex_q).

    Args:
        config: Validated run config
        output_dir: Directory for result files
        fmt: "csv" or "json"
        threads: Unused; root solving is vectorized

    Returns:
        Dict with row counts, residuals and written files
    """
    model = build_model(config)
    q = require_q(config, "roots")
    N = int(config["N"])

    logger.info(f"Solving roots up to |n| = {N} for {model.family} at q={q}")
    grid = solve_real_q(model, q, N)
    rows = grid.rows()
    files = write_result(output_dir, "roots", ROOT_COLUMNS, rows, config,
                         metadata=grid.to_dict(), fmt=fmt)

    result = {
        "command": "roots",
        "rows": len(rows),
        "zeta0_minus": grid.zeta0_minus,
        "zeta0_plus": grid.zeta0_plus,
        "max_residual": grid.max_residual(),
        "max_abs_residual": grid.max_abs_residual(),
    }

    if config.get("complex_q"):
        u_max = float(config["u_max"])
        path = continue_complex_q(model, grid, u_max)
        path_rows = path.rows()
        files += write_result(
            output_dir, "root_paths", PATH_COLUMNS, path_rows, config,
            metadata={"q0": q, "u_max": u_max, "points": len(path.u_grid),
                      "max_residual": float(path.residuals.max())},
            fmt=fmt,
        )
        result["path_rows"] = len(path_rows)
        result["path_max_residual"] = float(path.residuals.max())

    result["files"] = files
    return result
