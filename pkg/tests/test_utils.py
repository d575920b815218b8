#!/usr/bin/env python

"""Utility and resource tests."""

import math

import pytest

from treemap_growth.errors import MarginTooSmall
from treemap_growth.helpers.config_helper import EXPERIMENTS
from treemap_growth.resources import get_bands, get_path
from treemap_growth.utils import format_value, record_failure


@record_failure
def _trial(*, size: int, stream: int, error: Exception = None) -> float:
    if error is not None:
        raise error
    return size * stream


def test_record_failure():
    """Test that domain errors become nan and other errors propagate."""
    assert _trial(size=3, stream=2) == 6.0
    assert math.isnan(_trial(size=3, stream=2, error=MarginTooSmall("close")))
    with pytest.raises(KeyError):
        _trial(size=3, stream=2, error=KeyError("bug"))
    assert _trial.__name__ == "_trial"


@pytest.mark.parametrize(
    "value,expected",
    [(math.nan, "nan"), (3.0, "3"), (3, "3"), (0.25, "0.25"), (-2.0, "-2")],
)
def test_format_value(value, expected: str):
    """Test the CSV rendering of measured values."""
    assert format_value(value) == expected


def test_bands():
    """Test that every experiment has acceptance and reference bands."""
    bands = get_bands()
    assert set(bands) == set(EXPERIMENTS)
    for band in bands.values():
        low, high = band["acceptance"]
        assert low < high
        assert low <= band["reference"][0] <= band["reference"][1] <= high
    assert get_path(path="data/bands.yaml").is_file()
