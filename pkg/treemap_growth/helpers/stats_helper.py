#!/usr/bin/env python

"""Estimators and statistical tests."""

import logging
import math

from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence, Tuple

import numpy as np

from scipy import stats

from ..errors import DegenerateInput, InsufficientCounts

LOGGER = logging.getLogger(__name__)


class PowerLawFit(NamedTuple):
    """Least-squares fit of log y against log x."""

    slope: float
    intercept: float
    stderr_slope: float
    r_squared: float
    x_min: float
    x_max: float
    points: int


class ChiSquareResult(NamedTuple):
    # pylint: disable=missing-class-docstring
    statistic: float
    p_value: float
    dof: int
    categories: int


def fit_power_law(points: Iterable[Tuple[float, float]]) -> PowerLawFit:
    """
    Fits y = exp(intercept) * x ** slope.

    Args:
        points: (x, y) pairs; at least three, all positive.

    Returns:
        The fit; slope is the exponent estimate.
    """
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise DegenerateInput("At least three points are required!")
    if not np.all(np.isfinite(data)) or np.any(data <= 0):
        raise DegenerateInput("All coordinates must be positive and finite!")
    logs = np.log(data)
    if np.ptp(logs[:, 0]) == 0:
        raise DegenerateInput("All x values are equal!")

    result = stats.linregress(logs[:, 0], logs[:, 1])
    r_squared = min(1.0, max(0.0, float(result.rvalue) ** 2))
    stderr = float(result.stderr)
    if not math.isfinite(stderr):
        stderr = 0.0
    fit = PowerLawFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        stderr_slope=abs(stderr),
        r_squared=r_squared,
        x_min=float(data[:, 0].min()),
        x_max=float(data[:, 0].max()),
        points=int(data.shape[0]),
    )
    LOGGER.debug("Power law fit: %s", fit)
    return fit


def two_sample_chi_square(
    first: Mapping[Hashable, int],
    second: Mapping[Hashable, int],
    *,
    min_expected: float = 5.0,
) -> ChiSquareResult:
    """
    Chi-square test that two samples come from the same categorical law.

    Categories whose expected count is below min_expected in either sample are pooled;
    a pooled bin that is still too small is merged into the smallest regular category.
    """
    categories = sorted(set(first) | set(second), key=repr)
    table = np.array(
        [[sample.get(key, 0) for key in categories] for sample in (first, second)],
        dtype=float,
    )
    totals = table.sum(axis=1)
    if np.any(totals == 0):
        raise InsufficientCounts("Both samples must be nonempty!")

    expected = np.outer(totals, table.sum(axis=0)) / totals.sum()
    rare = np.any(expected < min_expected, axis=0)
    columns = [table[:, ~rare]]
    if rare.any():
        pooled = table[:, rare].sum(axis=1, keepdims=True)
        columns.append(pooled)
    merged = np.hstack(columns)
    if rare.any() and merged.shape[1] > 1:
        pooled_expected = np.outer(totals, merged.sum(axis=0)) / totals.sum()
        if np.any(pooled_expected[:, -1] < min_expected):
            smallest = int(np.argmin(merged[:, :-1].sum(axis=0)))
            merged[:, smallest] += merged[:, -1]
            merged = merged[:, :-1]
    if merged.shape[1] < 2:
        raise InsufficientCounts(
            f"Only {merged.shape[1]} category left after pooling!"
        )

    statistic, p_value, dof, _ = stats.chi2_contingency(merged, correction=False)
    LOGGER.debug(
        "Chi-square over %d categories: %.4f (p=%.4g).",
        merged.shape[1],
        statistic,
        p_value,
    )
    return ChiSquareResult(
        statistic=float(statistic),
        p_value=float(p_value),
        dof=int(dof),
        categories=int(merged.shape[1]),
    )


def tv_distance(
    first: Mapping[Hashable, float], second: Mapping[Hashable, float]
) -> float:
    """Total-variation distance between two discrete laws."""
    keys = set(first) | set(second)
    return 0.5 * sum(abs(first.get(key, 0.0) - second.get(key, 0.0)) for key in keys)


def binomial_z(successes: int, trials: int, probability: float) -> float:
    """Standardized deviation of a binomial count from its mean."""
    spread = math.sqrt(trials * probability * (1 - probability))
    if spread == 0:
        return 0.0 if successes == trials * probability else math.inf
    return (successes - trials * probability) / spread


def mean_and_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and standard error of the finite values."""
    data = np.asarray([value for value in values if math.isfinite(value)], dtype=float)
    if data.size == 0:
        return math.nan, math.nan
    if data.size == 1:
        return float(data[0]), 0.0
    return float(data.mean()), float(data.std(ddof=1) / math.sqrt(data.size))
