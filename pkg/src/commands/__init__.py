"""One module per CLI command; each exposes ``run(config, output_dir, fmt, threads) -> dict``."""

import numpy as np

COMMANDS = ["roots", "factor", "density", "invert", "validate"]


def x_grid(config: dict) -> np.ndarray:
    """Evaluation points from x_min, x_max, x_points and x_spacing."""
    if config["x_spacing"] == "log":
        return np.geomspace(config["x_min"], config["x_max"], config["x_points"])
    return np.linspace(config["x_min"], config["x_max"], config["x_points"])


def z_grid(config: dict, half_width: float = 10.0) -> np.ndarray:
    return np.linspace(-half_width, half_width, config["z_points"])


def require_q(config: dict, command: str) -> float:
    if config.get("q") is None:
        raise ValueError(f"Command '{command}' requires q (use --set q=...)")
    return float(config["q"])


def q_values(config: dict) -> list[float]:
    if config.get("q_list"):
        return [float(q) for q in config["q_list"]]
    if config.get("q") is not None:
        return [float(config["q"])]
    return [1.0]
