#!/usr/bin/env python

"""Experiment trial tests."""

import math

from pathlib import Path

import pytest

from treemap_growth.errors import MarginTooSmall
from treemap_growth.helpers.config_helper import ExperimentConfig
from treemap_growth.helpers.rng_helper import RngStream
from treemap_growth.subcommands.experiments import (
    TRACE_FIELDS,
    grow_window,
    trial_dla_diameter,
)


def test_grow_window_retries_with_larger_factors():
    """Test that a window too small for the margin is resampled with a larger factor."""
    factors = []

    def attempt(factor: float) -> float:
        factors.append(factor)
        if factor < 64:
            raise MarginTooSmall(f"Window factor {factor} too small!")
        return factor

    assert grow_window(attempt, 1.0, 1024.0) == 64.0
    assert factors == [1.0, 4.0, 16.0, 64.0]


def test_grow_window_gives_up():
    """Test that MarginTooSmall propagates once the largest factor is exhausted."""
    factors = []

    def attempt(factor: float) -> float:
        factors.append(factor)
        raise MarginTooSmall("Never enough room!")

    with pytest.raises(MarginTooSmall):
        grow_window(attempt, 2.0, 32.0)
    assert factors == [2.0, 8.0, 32.0]


def test_dla_trial_writes_trace(tmp_path: Path):
    """Test that a traced DLA trial records its steps and complementary components."""
    config = ExperimentConfig(
        experiment="dla-diameter",
        sizes=(2,),
        out=tmp_path,
        harmonic_margin=0.0,
        window_factor=16.0,
        trace=True,
    )
    stream = RngStream(seed=5, stream_id=0)
    value = trial_dla_diameter(config=config, size=2, stream=stream)
    assert value in (1.0, 2.0)

    lines = tmp_path.joinpath("traces", "dla-2-0.csv").read_text(encoding="utf-8")
    lines = lines.splitlines()
    key, _, components = lines[0].partition("=")
    assert key == "# complement_components"
    assert int(components) >= 1
    assert lines[1] == ",".join(TRACE_FIELDS)
    assert [line.split(",")[0] for line in lines[2:]] == ["1", "2"]

    again = trial_dla_diameter(config=config, size=2, stream=stream)
    assert again == value


def test_dla_trial_fails_without_room(tmp_path: Path):
    """Test that a trial whose windows never leave the margin yields nan."""
    config = ExperimentConfig(
        experiment="dla-diameter",
        sizes=(3,),
        out=tmp_path,
        harmonic_margin=1e9,
        window_factor=1.0,
        max_window_factor=4.0,
    )
    value = trial_dla_diameter(
        config=config, size=3, stream=RngStream(seed=5, stream_id=1)
    )
    assert math.isnan(value)
