#!/usr/bin/env python

"""Experiment orchestration: parallel trials, exponent fits, bands and result files."""

import csv
import json
import logging
import math

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .consts import CHI_DIMENSION_TOLERANCE
from .errors import DegenerateInput, TooManyFailures
from .helpers.config_helper import ExperimentConfig
from .helpers.rng_helper import RngStream
from .helpers.stats_helper import (
    PowerLawFit,
    fit_power_law,
    mean_and_stderr,
    two_sample_chi_square,
)
from .resources import get_bands
from .subcommands.experiments import EXPERIMENT_TRIALS
from .utils import format_value

LOGGER = logging.getLogger(__name__)

# Settings that never change the measured values.
UNSTAMPED_SETTINGS = ("out", "threads", "trace")

RESULT_FILES = ("results.csv", "means.csv", "fit.csv", "summary.json")

__all__ = [
    "Comparison",
    "EXPERIMENT_RUNNERS",
    "ExperimentResult",
    "SizeSummary",
    "compare_results",
    "experiment_ball_volume",
    "experiment_chi",
    "experiment_dla_diameter",
    "experiment_finite_diameter",
    "experiment_lerw_diameter",
    "fit_power_law",
    "run_configured",
    "run_experiment",
    "two_sample_chi_square",
]


class SizeSummary(NamedTuple):
    # pylint: disable=missing-class-docstring
    size: int
    mean: float
    stderr: float
    trials: int
    failures: int


class ExperimentResult(NamedTuple):
    """
    Outcome of an experiment.

    Attributes:
        config: The configuration that was run.
        values: Per size, the value of each trial in trial order (nan on failure).
        summaries: Per size mean, standard error and failure count.
        fit: Power-law fit of the means, absent when too few sizes remain.
        fit_sizes: Sizes entering the fit.
        passed: Whether the slope lies in the acceptance band, absent without a fit.
    """

    config: ExperimentConfig
    values: Dict[int, List[float]]
    summaries: List[SizeSummary]
    fit: Optional[PowerLawFit]
    fit_sizes: Tuple[int, ...]
    passed: Optional[bool]


class Comparison(NamedTuple):
    # pylint: disable=missing-class-docstring
    name: str
    passed: bool
    detail: str


def _run_trial(task: Tuple[ExperimentConfig, int, int]) -> float:
    config, size, stream_id = task
    trial = EXPERIMENT_TRIALS[config.experiment]
    stream = RngStream(seed=config.seed, stream_id=stream_id)
    return trial(config=config, size=size, stream=stream)


def _tasks(config: ExperimentConfig) -> List[Tuple[ExperimentConfig, int, int]]:
    return [
        (config, size, index * config.trials + trial)
        for index, size in enumerate(config.sizes)
        for trial in range(config.trials)
    ]


def collect_values(config: ExperimentConfig) -> Dict[int, List[float]]:
    """
    Runs every trial of an experiment.

    Trial i of the k-th size draws from the stream (seed, k * trials + i), so the
    values do not depend on the number of workers.
    """
    tasks = _tasks(config)
    if config.threads > 1:
        chunksize = max(1, len(tasks) // (4 * config.threads))
        with ProcessPoolExecutor(max_workers=config.threads) as executor:
            values = list(executor.map(_run_trial, tasks, chunksize=chunksize))
    else:
        values = [_run_trial(task) for task in tasks]

    result: Dict[int, List[float]] = {}
    for (_, size, _), value in zip(tasks, values):
        result.setdefault(size, []).append(value)
    return result


def summarize(values: Dict[int, List[float]]) -> List[SizeSummary]:
    """Means and standard errors over the successful trials of each size."""
    summaries = []
    for size in sorted(values):
        finite = [value for value in values[size] if not math.isnan(value)]
        failures = len(values[size]) - len(finite)
        mean, stderr = mean_and_stderr(finite) if finite else (math.nan, math.nan)
        summaries.append(
            SizeSummary(
                size=size,
                mean=mean,
                stderr=stderr,
                trials=len(finite),
                failures=failures,
            )
        )
    return summaries


def check_failures(summaries: Sequence[SizeSummary], limit: float):
    """
    Raises:
        TooManyFailures: The share of failed trials exceeds the limit at some size.
    """
    for summary in summaries:
        total = summary.trials + summary.failures
        if total and summary.failures / total > limit:
            raise TooManyFailures(
                f"{summary.failures} of {total} trials failed at size {summary.size} "
                f"(limit {limit:.0%})!"
            )


def fit_sizes(sizes: Sequence[int], discard_fraction: float) -> Tuple[int, ...]:
    """The sizes kept for the fit; the smallest are dropped while three remain."""
    sizes = sorted(sizes)
    discard = min(math.floor(discard_fraction * len(sizes)), max(0, len(sizes) - 3))
    return tuple(sizes[discard:])


def fit_summaries(
    summaries: Sequence[SizeSummary], discard_fraction: float
) -> Tuple[Optional[PowerLawFit], Tuple[int, ...]]:
    """Fits the means of the kept sizes; returns no fit on degenerate input."""
    usable = {summary.size: summary.mean for summary in summaries if summary.mean > 0}
    kept = fit_sizes(list(usable), discard_fraction)
    try:
        fit = fit_power_law([(size, usable[size]) for size in kept])
    except DegenerateInput as exception:
        LOGGER.warning("No exponent fit: %s", exception)
        return None, kept
    LOGGER.info(
        "Fitted slope %.4f +/- %.4f (r^2 = %.4f) on sizes %d..%d.",
        fit.slope,
        fit.stderr_slope,
        fit.r_squared,
        fit.x_min,
        fit.x_max,
    )
    return fit, kept


def within_band(value: float, band: Sequence[float]) -> bool:
    # pylint: disable=missing-function-docstring
    return band[0] <= value <= band[1]


def run_experiment(config: ExperimentConfig, *, write: bool = True) -> ExperimentResult:
    """
    Runs an experiment end to end.

    Args:
        config: The experiment configuration.
        write: Write result files below config.out.

    Returns:
        The values, summaries, fit and acceptance verdict.

    Raises:
        TooManyFailures: More than config.failure_limit of the trials failed at a size.
    """
    LOGGER.info(
        "Running %s on sizes %s with %d trials each (seed %d, %d workers).",
        config.experiment,
        ",".join(str(size) for size in config.sizes),
        config.trials,
        config.seed,
        config.threads,
    )
    values = collect_values(config)
    summaries = summarize(values)
    check_failures(summaries, config.failure_limit)
    fit, kept = fit_summaries(summaries, config.discard_fraction)

    passed = None
    if fit is not None:
        band = get_bands()[config.experiment]
        passed = within_band(fit.slope, band["acceptance"])
        if not passed:
            LOGGER.warning(
                "Slope %.4f of %s outside the acceptance band %s.",
                fit.slope,
                band["quantity"],
                band["acceptance"],
            )

    result = ExperimentResult(
        config=config,
        values=values,
        summaries=summaries,
        fit=fit,
        fit_sizes=kept,
        passed=passed,
    )
    if write:
        write_results(result)
    LOGGER.info("Finished %s.", config.experiment)
    return result


def experiment_dla_diameter(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """DLA cluster diameter against cluster size; the slope estimates 2/d."""
    return _run_named(config, "dla-diameter", **kwargs)


def experiment_lerw_diameter(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Diameter of the LERW to infinity against its length; the slope estimates 2/d."""
    return _run_named(config, "lerw-diameter", **kwargs)


def experiment_chi(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Internal diameter of window submaps against window length; estimates 1/d."""
    return _run_named(config, "chi", **kwargs)


def experiment_ball_volume(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Ball volume against radius; the slope estimates d."""
    return _run_named(config, "ball-volume", **kwargs)


def experiment_finite_diameter(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Diameter of finite maps against edge count; the slope estimates 1/d."""
    return _run_named(config, "finite-diameter", **kwargs)


def _run_named(config: ExperimentConfig, experiment: str, **kwargs) -> ExperimentResult:
    if config.experiment != experiment:
        raise ValueError(f"Configuration is for {config.experiment}, not {experiment}!")
    return run_experiment(config, **kwargs)


EXPERIMENT_RUNNERS: Dict[str, Callable[..., ExperimentResult]] = {
    "dla-diameter": experiment_dla_diameter,
    "lerw-diameter": experiment_lerw_diameter,
    "chi": experiment_chi,
    "ball-volume": experiment_ball_volume,
    "finite-diameter": experiment_finite_diameter,
}


def run_configured(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    """Runs the experiment named by the configuration."""
    return EXPERIMENT_RUNNERS[config.experiment](config, **kwargs)


def load_summary(path: Path) -> Dict[str, Any]:
    """
    Reads the JSON summary of a finished experiment.

    Args:
        path: A results directory or its summary.json.

    Returns:
        The summary; its "fit" entry holds the PowerLawFit fields.

    Raises:
        DegenerateInput: The summary records no fit.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "summary.json"
    summary = json.loads(path.read_text(encoding="utf-8"))
    if not summary.get("fit"):
        raise DegenerateInput(f"No fit recorded in {path}!")
    return summary


def _fit_of(summary: Dict[str, Any], experiment: str) -> Dict[str, float]:
    if summary.get("experiment") != experiment:
        raise ValueError(
            f"Expected a {experiment} summary, not {summary.get('experiment')}!"
        )
    return summary["fit"]


def compare_growth_exponents(dla: Dict[str, Any], lerw: Dict[str, Any]) -> Comparison:
    """DLA and LERW diameter slopes agree within twice their joint standard error."""
    first = _fit_of(dla, "dla-diameter")
    second = _fit_of(lerw, "lerw-diameter")
    gap = abs(first["slope"] - second["slope"])
    allowed = 2 * math.hypot(first["stderr_slope"], second["stderr_slope"])
    return Comparison(
        name="dla-vs-lerw",
        passed=gap <= allowed,
        detail=(
            f"slopes {first['slope']:.4f} and {second['slope']:.4f} differ by "
            f"{gap:.4f}, allowed {allowed:.4f}"
        ),
    )


def compare_chi_with_dimension(
    chi: Dict[str, Any],
    ball: Dict[str, Any],
    *,
    tolerance: float = CHI_DIMENSION_TOLERANCE,
) -> Comparison:
    """The chi slope lies within `tolerance` of one over the ball-growth dimension."""
    chi_slope = _fit_of(chi, "chi")["slope"]
    dimension = _fit_of(ball, "ball-volume")["slope"]
    if dimension <= 0:
        raise DegenerateInput(f"Ball growth slope {dimension} is not positive!")
    gap = abs(chi_slope - 1 / dimension)
    return Comparison(
        name="chi-vs-dimension",
        passed=gap < tolerance,
        detail=(
            f"chi {chi_slope:.4f} against 1/d = {1 / dimension:.4f} "
            f"(d = {dimension:.4f}), gap {gap:.4f}, tolerance {tolerance}"
        ),
    )


def compare_results(
    *,
    dla: Optional[Path] = None,
    lerw: Optional[Path] = None,
    chi: Optional[Path] = None,
    ball: Optional[Path] = None,
) -> List[Comparison]:
    """
    Cross-checks finished experiments read from their results directories.

    DLA is compared with LERW and chi with ball volume; a pair is skipped unless both
    directories are given.
    """
    comparisons = []
    if dla is not None and lerw is not None:
        comparisons.append(
            compare_growth_exponents(load_summary(dla), load_summary(lerw))
        )
    if chi is not None and ball is not None:
        comparisons.append(
            compare_chi_with_dimension(load_summary(chi), load_summary(ball))
        )
    if not comparisons:
        raise ValueError("Give both DLA and LERW results, or both chi and ball volume!")
    for comparison in comparisons:
        log = LOGGER.info if comparison.passed else LOGGER.warning
        log(
            "%s %s: %s",
            "PASS" if comparison.passed else "FAIL",
            comparison.name,
            comparison.detail,
        )
    return comparisons


def header_lines(config: ExperimentConfig) -> List[str]:
    """Comment lines stamping the version and the settings that shape the values."""
    # Note: * This cannot be imported above, as it causes a circular import!
    #       * This requires '__version__' to be defined in '__init__.py'
    from . import __version__  # pylint: disable=import-outside-toplevel

    lines = [f"# version={__version__}"]
    for key, value in config.as_header().items():
        if key not in UNSTAMPED_SETTINGS:
            lines.append(f"# {key}={value}")
    return lines


def _write_csv(path: Path, header: List[str], fields: List[str], rows: List[List[str]]):
    with path.open("w", encoding="utf-8", newline="") as file:
        for line in header:
            file.write(line + "\n")
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(fields)
        writer.writerows(rows)
    LOGGER.debug("Wrote %d rows to %s.", len(rows), path)


def fit_record(result: ExperimentResult) -> Dict[str, object]:
    """Fit, bands and verdict as written to the JSON summary."""
    band = get_bands()[result.config.experiment]
    record: Dict[str, object] = {
        "experiment": result.config.experiment,
        "quantity": band["quantity"],
        "acceptance": list(band["acceptance"]),
        "reference": list(band["reference"]),
        "fit_sizes": list(result.fit_sizes),
        "fit": None,
        "passed": result.passed,
        "reference_within_2_stderr": None,
    }
    if result.fit is not None:
        fit = result.fit
        record["fit"] = {key: float(value) for key, value in fit._asdict().items()}
        low = fit.slope - 2 * fit.stderr_slope
        high = fit.slope + 2 * fit.stderr_slope
        reference_low, reference_high = band["reference"]
        record["reference_within_2_stderr"] = bool(
            low <= reference_high and reference_low <= high
        )
    return record


def write_results(result: ExperimentResult) -> Dict[str, Path]:
    """
    Writes results.csv (size,trial,value), means.csv, fit.csv and summary.json below
    config.out.

    The CSV files depend only on the seed, the measured settings and the version.
    """
    config = result.config
    config.out.mkdir(parents=True, exist_ok=True)
    header = header_lines(config)
    paths = {name: config.out / name for name in RESULT_FILES}

    rows = [
        [str(size), str(trial), format_value(value)]
        for size in sorted(result.values)
        for trial, value in enumerate(result.values[size])
    ]
    _write_csv(paths["results.csv"], header, ["size", "trial", "value"], rows)

    rows = [
        [
            str(item.size),
            format_value(item.mean),
            format_value(item.stderr),
            str(item.trials),
            str(item.failures),
        ]
        for item in result.summaries
    ]
    fields = ["size", "mean", "stderr", "trials", "failures"]
    _write_csv(paths["means.csv"], header, fields, rows)

    fields = list(PowerLawFit._fields)
    rows = []
    if result.fit is not None:
        rows.append([format_value(float(value)) for value in result.fit])
    _write_csv(paths["fit.csv"], header, fields, rows)

    settings = dict(line[2:].split("=", 1) for line in header)
    summary = {"settings": settings, **fit_record(result)}
    summary["sizes"] = [item._asdict() for item in result.summaries]
    paths["summary.json"].write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=format_value) + "\n",
        encoding="utf-8",
    )
    LOGGER.info("Results written to %s.", config.out)
    return paths
