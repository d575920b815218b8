#!/usr/bin/env python

"""Utility classes."""

import logging
import math

from functools import wraps
from typing import Union

from .errors import TreemapGrowthError

LOGGER = logging.getLogger(__name__)


def record_failure(func):
    """Decorates a trial function so that domain errors yield nan."""

    @wraps(func)
    def wrapper(*args, **kwargs) -> float:
        try:
            return float(func(*args, **kwargs))
        except TreemapGrowthError as exception:
            LOGGER.warning(
                "Trial %s (size %s, stream %s) failed: %s",
                func.__name__,
                kwargs.get("size"),
                kwargs.get("stream"),
                exception,
            )
            return math.nan

    return wrapper


def format_value(value: Union[int, float]) -> str:
    """
    Formats a measured value for CSV output.

    Args:
        value: The value to be formatted.

    Returns: "nan" for missing values, integral values without a fraction and repr()
             otherwise.
    """
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if value.is_integer():
            return str(int(value))
    return repr(value)
