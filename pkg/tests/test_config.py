"""Tests for config loading, overrides and output directories."""

from pathlib import Path

import pytest

from src.config import (
    DEFAULTS,
    get_output_directory,
    load_config,
    parse_override,
    setup_output_directory,
)
from src.errors import DomainError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
BASE = ["run_id=test", "family=sech", "alpha=0.25"]


def test_defaults_applied():
    config = load_config(None, BASE)
    for key in ("N", "K", "x_spacing", "imag_tol", "u_max"):
        assert config[key] == DEFAULTS[key]
    assert config["q"] is None


@pytest.mark.parametrize("name", ["sech.yaml", "sinh.yaml", "beta.yaml", "invert.yaml", "validate.yaml"])
def test_bundled_configs_load(name):
    config = load_config(str(CONFIG_DIR / name))
    assert config["family"] in ("sech", "sinh", "beta")


def test_overrides_follow_the_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("run_id: file_run\nfamily: sinh\nalpha: 0.25\nsigma: 1.0\nN: 100\n")
    config = load_config(str(path), ["N=120", "q=0.5", "complex_q=true"])
    assert config["N"] == 120
    assert config["q"] == 0.5
    assert config["complex_q"] is True
    assert config["run_id"] == "file_run"


def test_parse_override_reads_yaml_values():
    assert parse_override("q_list=[0.5, 1]") == ("q_list", [0.5, 1])
    assert parse_override(" x_spacing = linear") == ("x_spacing", "linear")
    with pytest.raises(ValueError):
        parse_override("q")


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_config("does/not/exist.yaml")


@pytest.mark.parametrize(
    "overrides, message",
    [
        (["family=sech", "alpha=0.25"], "Missing required"),
        (BASE + ["colour=red"], "Unknown config keys"),
        (["run_id=x", "family=levy"], "Invalid family"),
        (["run_id=x", "family=sinh"], "requires parameters"),
        (BASE + ["sigma=1.0"], "do not apply"),
        (BASE + ["N=50", "K=40"], "N must be >= 2K"),
        (BASE + ["x_spacing=cubic"], "Invalid x_spacing"),
        (BASE + ["q=-1"], "q must be >= 0"),
        (BASE + ["x_min=5", "x_max=1"], "x_min < x_max"),
    ],
)
def test_invalid_configs(overrides, message):
    with pytest.raises(ValueError, match=message):
        load_config(None, overrides)


def test_model_invariants_are_checked():
    with pytest.raises(DomainError):
        load_config(None, ["run_id=x", "family=sech", "alpha=1.5"])


def test_output_directory(tmp_path):
    config = load_config(None, BASE)
    out = setup_output_directory(config, base_path=str(tmp_path))
    assert Path(out) == tmp_path / "test"
    assert Path(out).is_dir()
    with pytest.raises(FileExistsError):
        setup_output_directory(config, base_path=str(tmp_path))
    assert setup_output_directory(config, base_path=str(tmp_path), overwrite=True) == out


def test_explicit_output_dir_wins(tmp_path):
    config = load_config(None, BASE + [f"output_dir={tmp_path / 'custom'}"])
    assert get_output_directory(config, "ignored") == str(tmp_path / "custom")
