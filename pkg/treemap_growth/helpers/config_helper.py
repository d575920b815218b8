#!/usr/bin/env python

"""Helper classes to handle experiment configuration."""

import logging

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from ..consts import (
    DEFAULT_BUFFER_RATIO,
    DEFAULT_DISCARD_FRACTION,
    DEFAULT_FAILURE_LIMIT,
    DEFAULT_MAX_BUFFER_RATIO,
    DEFAULT_MAX_WINDOW_FACTOR,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WINDOW_FACTOR,
    HARMONIC_MIN_RATIO,
)
from ..errors import ConfigError

LOGGER = logging.getLogger(__name__)

EXPERIMENTS = ("dla-diameter", "lerw-diameter", "chi", "ball-volume", "finite-diameter")
BOUNDARY_MODES = ("none", "sqrt")
GRAPH_KINDS = ("mullin", "mated-crt")


def parse_sizes(text: str) -> Tuple[int, ...]:
    """
    Parses a size grid.

    Explicit lists ("8,16,32") are taken as is. "a,b,...,z" is a geometric progression
    when b / a is an integer >= 2 whose powers reach z exactly, and an arithmetic one
    otherwise.
    """
    tokens = [token.strip() for token in str(text).split(",") if token.strip()]
    try:
        if "..." in tokens:
            if len(tokens) != 4 or tokens[2] != "...":
                raise ConfigError(f"Progressions take the form a,b,...,z: {text}")
            first, second, last = int(tokens[0]), int(tokens[1]), int(tokens[3])
            if not 0 < first < second <= last:
                raise ConfigError(f"Progression must increase: {text}")
            ratio, remainder = divmod(second, first)
            sizes = [first]
            if not remainder and ratio >= 2:
                while sizes[-1] < last:
                    sizes.append(sizes[-1] * ratio)
                if sizes[-1] == last:
                    return tuple(sizes)
            return tuple(range(first, last + 1, second - first))
        sizes = tuple(int(token) for token in tokens)
    except ValueError as exception:
        raise ConfigError(f"Invalid size grid: {text}") from exception
    if not sizes:
        raise ConfigError("Empty size grid!")
    return sizes


@dataclass(frozen=True)
class ExperimentConfig:
    # pylint: disable=too-many-instance-attributes
    """
    Validated experiment configuration.

    Attributes:
        experiment: One of EXPERIMENTS.
        sizes: Size grid (cluster edges, path edges, map edges or radii).
        trials: Trials per size.
        seed: Master seed; trial i of size k uses the stream (seed, k * trials + i).
        out: Output directory.
        buffer_ratio: Initial buffer length over core length for windows.
        max_buffer_ratio: Buffer ratio at which a window is given up.
        harmonic_margin: Smallest accepted ratio between the far-target distance and
                         the cluster diameter for growth towards infinity.
        steps_per_unit: Walk steps per cell for mated-CRT graphs.
        threads: Worker processes.
        window_factor: Window length over the natural size scale; the first DLA window
                       spans window_factor * size**2 steps.
        max_window_factor: Largest DLA window factor tried before a trial fails.
        discard_fraction: Share of the smallest sizes left out of the fit.
        boundary: "sqrt" to give finite maps a boundary of length floor(sqrt(n)).
        graph: Graph used for ball growth: "mullin" windows or "mated-crt" maps.
        failure_limit: Largest tolerated share of failed trials per size.
        trace: Write per-step DLA traces; these carry timings and are not reproducible.
    """

    experiment: str
    sizes: Tuple[int, ...]
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    out: Path = Path("results")
    buffer_ratio: float = DEFAULT_BUFFER_RATIO
    max_buffer_ratio: float = DEFAULT_MAX_BUFFER_RATIO
    harmonic_margin: float = HARMONIC_MIN_RATIO
    steps_per_unit: int = 1
    threads: int = 1
    window_factor: float = DEFAULT_WINDOW_FACTOR
    max_window_factor: float = DEFAULT_MAX_WINDOW_FACTOR
    discard_fraction: float = DEFAULT_DISCARD_FRACTION
    boundary: str = "none"
    graph: str = "mullin"
    failure_limit: float = DEFAULT_FAILURE_LIMIT
    trace: bool = False

    def __post_init__(self):
        sizes = self.sizes
        if isinstance(sizes, str):
            sizes = parse_sizes(sizes)
        object.__setattr__(self, "sizes", tuple(int(size) for size in sizes))
        object.__setattr__(self, "out", Path(self.out))

        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment: {self.experiment}")
        if not self.sizes or min(self.sizes) < 1:
            raise ConfigError(f"Sizes must be positive: {self.sizes}")
        if self.trials < 1 or self.threads < 1 or self.steps_per_unit < 1:
            raise ConfigError("Trials, threads and steps per unit must be positive!")
        for name in (
            "buffer_ratio",
            "max_buffer_ratio",
            "window_factor",
            "max_window_factor",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive!")
        if self.max_window_factor < self.window_factor:
            raise ConfigError("max_window_factor must be at least window_factor!")
        if self.harmonic_margin < 0:
            raise ConfigError("harmonic_margin must be nonnegative!")
        if not 0 <= self.discard_fraction < 1 or not 0 <= self.failure_limit <= 1:
            raise ConfigError("Fractions must lie in [0, 1)!")
        if self.boundary not in BOUNDARY_MODES:
            raise ConfigError(f"Unknown boundary mode: {self.boundary}")
        if self.graph not in GRAPH_KINDS:
            raise ConfigError(f"Unknown graph: {self.graph}")

    def as_header(self) -> Dict[str, str]:
        """Key / value pairs recorded in result files."""
        result = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if item.name == "sizes":
                value = ",".join(str(size) for size in value)
            result[item.name] = str(value)
        return result


def _normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def load_config_file(*, path: Path) -> Dict[str, Any]:
    """
    Reads a flat key=value file; '#' starts a comment.

    Returns:
        Values coerced with yaml.safe_load, keyed by field name (dashes become
        underscores).
    """
    result = {}
    with Path(path).open("r", encoding="utf-8") as file:
        for number, line in enumerate(file, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{number}: expected key=value")
            key, value = line.split("=", 1)
            try:
                result[_normalize_key(key)] = yaml.safe_load(value.strip())
            except yaml.YAMLError as exception:
                raise ConfigError(f"{path}:{number}: {exception}") from exception
    LOGGER.debug("Read %d settings from %s.", len(result), path)
    return result


def build_config(
    *, path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Merges defaults, a config file and command line overrides (highest precedence;
    None values are ignored).
    """
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(load_config_file(path=path))
    values.update(
        {
            _normalize_key(key): value
            for key, value in (overrides or {}).items()
            if value is not None
        }
    )

    names = {item.name for item in fields(ExperimentConfig)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"Unknown settings: {', '.join(unknown)}")
    if "experiment" not in values or "sizes" not in values:
        raise ConfigError("Both experiment and sizes are required!")
    if isinstance(values["sizes"], int):
        values["sizes"] = (values["sizes"],)
    try:
        return ExperimentConfig(**values)
    except TypeError as exception:
        raise ConfigError(str(exception)) from exception


