"""Configuration loading and validation for factorization runs."""

import yaml
from pathlib import Path

from .models import MODEL_FIELDS, build_model

REQUIRED_FIELDS = [
    "run_id",
    "family",
]

VALID_FAMILIES = ["sech", "sinh", "beta"]

VALID_X_SPACINGS = ["log", "linear"]

VALID_MC_HORIZONS = ["expq", "fixed"]

REQUIRED_MODEL_FIELDS = {
    family: [name for name in fields if name not in ("sigma", "mu")]
    for family, fields in MODEL_FIELDS.items()
}

DEFAULTS = {
    "q": None,
    "q_list": None,
    "t": None,
    "t_list": None,
    "N": 200,
    "K": 40,
    "x_min": 0.01,
    "x_max": 10.0,
    "x_points": 200,
    "x_spacing": "log",
    "z_points": 50,
    "u_max": 200.0,
    "q0": None,
    "complex_q": False,
    "seed": 0,
    "n_samples": 100_000,
    "mc_horizon": "expq",
    "use_closed_form": None,
    "inject_fault": False,
    "imag_tol": 1e-6,
    "output_dir": None,
}

MODEL_KEYS = sorted({name for fields in MODEL_FIELDS.values() for name in fields})

KNOWN_KEYS = set(REQUIRED_FIELDS) | set(DEFAULTS) | set(MODEL_KEYS)


def parse_override(text: str) -> tuple[str, object]:
    """Parse one ``key=value`` override; the value is read as YAML.

    Raises:
        ValueError: If the text has no '='
    """
    if "=" not in text:
        raise ValueError(f"Override must look like key=value, got '{text}'")
    key, raw = text.split("=", 1)
    return key.strip(), yaml.safe_load(raw)


def load_config(path: str | None, overrides: list[str] | None = None) -> dict:
    """Load and validate a YAML run config.

    Args:
        path: Path to the YAML config file (None for overrides only)
        overrides: ``key=value`` strings applied after the file

    Returns:
        Validated config dictionary

    Raises:
        FileNotFoundError: If config file doesn't exist
        ValueError: If config validation fails
    """
    config: dict = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        with open(config_path, "r") as f:
            config = yaml.safe_load(f) or {}
        if not isinstance(config, dict):
            raise ValueError(f"Config file must contain a mapping: {path}")

    for text in overrides or []:
        key, value = parse_override(text)
        config[key] = value

    # Apply defaults for missing optional fields
    for key, default_value in DEFAULTS.items():
        if key not in config:
            config[key] = default_value

    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    """Validate config has all required fields and valid values.

    Model invariants are checked by building the model, so their messages
    name the violated constraint.

    Raises:
        ValueError: If validation fails
    """
    missing = [f for f in REQUIRED_FIELDS if config.get(f) is None]
    if missing:
        raise ValueError(f"Missing required config fields: {missing}")

    unknown = sorted(set(config) - KNOWN_KEYS)
    if unknown:
        raise ValueError(f"Unknown config keys: {unknown}")

    family = config["family"]
    if family not in VALID_FAMILIES:
        raise ValueError(f"Invalid family '{family}'. Must be one of: {VALID_FAMILIES}")

    missing_params = [f for f in REQUIRED_MODEL_FIELDS[family] if config.get(f) is None]
    if missing_params:
        raise ValueError(f"Family '{family}' requires parameters: {missing_params}")

    foreign = [k for k in MODEL_KEYS if k not in MODEL_FIELDS[family] and config.get(k) is not None]
    if foreign:
        raise ValueError(f"Parameters {foreign} do not apply to family '{family}'")

    build_model(config)

    if config["x_spacing"] not in VALID_X_SPACINGS:
        raise ValueError(f"Invalid x_spacing '{config['x_spacing']}'. Must be one of: {VALID_X_SPACINGS}")
    if config["mc_horizon"] not in VALID_MC_HORIZONS:
        raise ValueError(f"Invalid mc_horizon '{config['mc_horizon']}'. Must be one of: {VALID_MC_HORIZONS}")

    if config["q"] is not None and config["q"] < 0:
        raise ValueError("q must be >= 0")
    if config["N"] < 10:
        raise ValueError("N must be >= 10")
    if config["K"] < 1:
        raise ValueError("K must be >= 1")
    if config["N"] < 2 * config["K"]:
        raise ValueError("N must be >= 2K")
    if not 0 < config["x_min"] < config["x_max"]:
        raise ValueError("Need 0 < x_min < x_max")
    if config["x_points"] < 1:
        raise ValueError("x_points must be >= 1")
    if config["u_max"] <= 0:
        raise ValueError("u_max must be > 0")
    if config["t"] is not None and config["t"] <= 0:
        raise ValueError("t must be > 0")
    if config["n_samples"] < 1:
        raise ValueError("n_samples must be >= 1")


def model_from_config(config: dict):
    return build_model(config)


def setup_output_directory(
    config: dict, base_path: str = "outputs", overwrite: bool = False
) -> str:
    """Create output directory for this run.

    Args:
        config: Config dictionary with run_id
        base_path: Base directory for outputs (default: "outputs")
        overwrite: If True, allow an existing directory

    Returns:
        Path to the output directory

    Raises:
        FileExistsError: If output directory already exists (and overwrite=False)
    """
    output_dir = Path(get_output_directory(config, base_path))

    if output_dir.exists() and not overwrite:
        raise FileExistsError(
            f"Output directory already exists: {output_dir}. "
            "Use a different run_id, use --overwrite, or remove the existing directory."
        )

    output_dir.mkdir(parents=True, exist_ok=True)
    return str(output_dir)


def get_output_directory(config: dict, base_path: str = "outputs") -> str:
    """Get the output directory path for a run (without creating it).

    ``output_dir`` in the config takes precedence over base_path/run_id.
    """
    if config.get("output_dir"):
        return str(config["output_dir"])
    return str(Path(base_path) / str(config["run_id"]))
