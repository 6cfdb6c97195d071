"""density: law of the supremum at an exponential horizon."""

import logging

from ..distributions import sup_density_expq, sup_density_surface
from ..models import build_model
from ..output import write_result
from ..roots import solve_real_q
from . import invert, x_grid

logger = logging.getLogger(__name__)

DENSITY_COLUMNS = ["x", "value", "error_estimate", "cdf"]
SURFACE_COLUMNS = ["q", "x", "value"]


def run(config: dict, output_dir: str, fmt: str = "csv", threads: int = 1) -> dict:
    """Write density.csv for q (and surface.csv for q_list); with only t, run the inversion.

    Raises:
        ValueError: If neither q, q_list nor t is given
    """
    if config.get("q") is None and not config.get("q_list"):
        if config.get("t") is not None or config.get("t_list"):
            return invert.run(config, output_dir, fmt, threads)
        raise ValueError("Command 'density' requires q, q_list or t")

    model = build_model(config)
    x = x_grid(config)
    N, K = int(config["N"]), int(config["K"])
    result = {"command": "density", "files": []}

    if config.get("q") is not None:
        q = float(config["q"])
        dens = sup_density_expq(model, solve_real_q(model, q, N), K)
        values = dens.density(x)
        errors = dens.error_estimate(x)
        cdf = dens.cdf(x)
        rows = [
            {"x": float(xi), "value": float(v), "error_estimate": float(e), "cdf": float(c)}
            for xi, v, e, c in zip(x, values, errors, cdf)
        ]
        metadata = {
            "atom": float(dens.atom),
            "total_mass": float(dens.total_mass()),
            "tail_mass": float(dens.tail_mass),
            "mean": float(dens.mean()),
            "K": K,
        }
        result["files"] += write_result(output_dir, "density", DENSITY_COLUMNS, rows, config,
                                        metadata=metadata, fmt=fmt)
        result.update(rows=len(rows), **metadata)

    if config.get("q_list"):
        q_list = [float(q) for q in config["q_list"]]
        surface = sup_density_surface(model, q_list, x, N=N, K=K)
        rows = [
            {"q": q, "x": float(xi), "value": float(surface[i, j])}
            for i, q in enumerate(q_list) for j, xi in enumerate(x)
        ]
        result["files"] += write_result(output_dir, "surface", SURFACE_COLUMNS, rows, config,
                                        metadata={"q_list": q_list}, fmt=fmt)
        result["surface_rows"] = len(rows)

    return result
