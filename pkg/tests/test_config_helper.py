#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""Configuration helper tests."""

from pathlib import Path

import pytest

from treemap_growth.errors import ConfigError
from treemap_growth.helpers.config_helper import (
    ExperimentConfig,
    build_config,
    load_config_file,
    parse_sizes,
)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("8,16,32", (8, 16, 32)),
        ("32,64,...,1024", (32, 64, 128, 256, 512, 1024)),
        ("10,20,...,50", (10, 20, 30, 40, 50)),
        ("5,8,...,20", (5, 8, 11, 14, 17, 20)),
        ("7", (7,)),
    ],
)
def test_parse_sizes(text: str, expected: tuple):
    """Test explicit, geometric and arithmetic size grids."""
    assert parse_sizes(text) == expected


@pytest.mark.parametrize("text", ["", "a,b", "1,2,...", "8,4,...,16", "1,...,4,8"])
def test_parse_sizes_invalid(text: str):
    """Test that malformed size grids are rejected."""
    with pytest.raises(ConfigError):
        parse_sizes(text)


def test_config_defaults():
    """Test that a configuration needs only an experiment and sizes."""
    config = ExperimentConfig(experiment="chi", sizes="8,16")
    assert config.sizes == (8, 16)
    assert config.trials == 32
    assert config.seed == 42
    assert config.out == Path("results")
    assert config.discard_fraction == 0.25
    assert config.failure_limit == 0.2
    assert config.harmonic_margin == 10.0
    assert config.max_window_factor >= config.window_factor


@pytest.mark.parametrize(
    "kwargs",
    [
        {"experiment": "volume"},
        {"sizes": (0, 8)},
        {"trials": 0},
        {"threads": 0},
        {"window_factor": 0.0},
        {"window_factor": 8.0, "max_window_factor": 4.0},
        {"harmonic_margin": -1.0},
        {"discard_fraction": 1.0},
        {"failure_limit": 1.5},
        {"boundary": "square"},
        {"graph": "grid"},
    ],
)
def test_config_validation(kwargs: dict):
    """Test that invalid settings raise ConfigError."""
    values = {"experiment": "chi", "sizes": (8, 16)}
    values.update(kwargs)
    with pytest.raises(ConfigError):
        ExperimentConfig(**values)


def test_as_header():
    """Test the key / value pairs stamped on result files."""
    config = ExperimentConfig(experiment="ball-volume", sizes=(2, 4), graph="mated-crt")
    header = config.as_header()
    assert header["experiment"] == "ball-volume"
    assert header["sizes"] == "2,4"
    assert header["graph"] == "mated-crt"
    assert header["trace"] == "False"
    assert list(header)[:2] == ["experiment", "sizes"]


def test_load_config_file(config_file: Path):
    """Test reading a flat key=value file."""
    values = load_config_file(path=config_file)
    assert values == {
        "experiment": "finite-diameter",
        "sizes": "4,8,16",
        "trials": 3,
        "seed": 7,
    }


def test_load_config_file_errors(tmp_path: Path):
    """Test that malformed lines name the file and line."""
    path = tmp_path.joinpath("bad.conf")
    path.write_text("experiment = chi\nsizes\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="bad.conf:2"):
        load_config_file(path=path)


def test_build_config_precedence(config_file: Path, tmp_path: Path):
    """Test that command line overrides win over the file, and None values are ignored."""
    config = build_config(
        path=config_file,
        overrides={
            "trials": 5,
            "seed": None,
            "out": tmp_path,
            "boundary": "sqrt",
            "window-factor": 2,
        },
    )
    assert config.experiment == "finite-diameter"
    assert config.sizes == (4, 8, 16)
    assert config.trials == 5
    assert config.seed == 7
    assert config.out == tmp_path
    assert config.boundary == "sqrt"
    assert config.window_factor == 2


def test_build_config_errors(tmp_path: Path):
    """Test missing and unknown settings."""
    with pytest.raises(ConfigError):
        build_config(overrides={"experiment": "chi"})
    with pytest.raises(ConfigError):
        build_config(overrides={"experiment": "chi", "sizes": "8", "colour": "blue"})
    path = tmp_path.joinpath("single.conf")
    path.write_text("experiment = chi\nsizes = 16\n", encoding="utf-8")
    assert build_config(path=path).sizes == (16,)
