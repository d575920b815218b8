#!/usr/bin/env python

"""Sub-command: single trials of the exponent experiments."""

import csv
import logging
import math

from pathlib import Path
from typing import Callable, Dict, List, Tuple, TypeVar

from ..consts import DEFAULT_REJECTION_BUDGET, WINDOW_GROWTH
from ..dla_engine import (
    DlaCluster,
    DlaTraceRow,
    cluster_diameter,
    complement_components,
    dla_run,
)
from ..errors import MarginTooSmall, RejectionBudgetExceeded
from ..helpers.config_helper import ExperimentConfig
from ..helpers.rng_helper import RngStream
from ..mated_crt import PairKind, ball_growth_series, build_graph, generate_walk_pair
from ..mullin_codec import (
    SampledWindow,
    accept_boundary_rooting,
    decode,
    sample_boundary_excursion,
    sample_branch_window,
    sample_window,
)
from ..planar_map import PlanarMap, diameter, edge_vertices, set_diameter
from ..utils import format_value, record_failure
from ..walk_engines import HarmonicPolicy

LOGGER = logging.getLogger(__name__)

T = TypeVar("T")
Trial = Callable[..., float]

TRACE_FIELDS = list(DlaTraceRow._fields)


def _write_trace(path: Path, rows: List[DlaTraceRow], components: int):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as file:
        file.write(f"# complement_components={components}\n")
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    LOGGER.debug("Wrote %d trace rows to %s.", len(rows), path)


def _centre_vertex(sampled: SampledWindow) -> int:
    window = sampled.window
    return window.vertex_index[sampled.state.vertex_at_time[sampled.centre_time]]


def grow_window(
    attempt: Callable[[float], T], window_factor: float, max_window_factor: float
) -> T:
    """
    Calls attempt(factor) with growing factors until no MarginTooSmall is raised.

    The factor starts at window_factor and is multiplied by WINDOW_GROWTH after each
    failure; MarginTooSmall propagates once the factor would exceed max_window_factor.
    """
    factor = window_factor
    while True:
        try:
            return attempt(factor)
        except MarginTooSmall as exception:
            factor *= WINDOW_GROWTH
            if factor > max_window_factor:
                raise
            LOGGER.debug("%s Retrying with window factor %g.", exception, factor)


@record_failure
def trial_dla_diameter(
    *, config: ExperimentConfig, size: int, stream: RngStream
) -> float:
    """
    Diameter, in the map metric, of a DLA cluster of `size` edges grown to infinity.

    Each step is aimed from the vertex of the window farthest from the cluster, which
    must lie harmonic_margin cluster diameters away. A window of factor * size**2 steps
    around the seed that cannot keep that margin is resampled with a larger factor.
    """
    rng = stream.generator()
    rows: List[DlaTraceRow] = []

    def attempt(factor: float) -> Tuple[PlanarMap, DlaCluster]:
        sampled = sample_window(
            math.ceil(factor * size * size),
            rng,
            buffer_ratio=config.buffer_ratio,
            max_buffer_ratio=config.max_buffer_ratio,
        )
        rows.clear()
        cluster = dla_run(
            sampled.window.map,
            _centre_vertex(sampled),
            HarmonicPolicy(min_ratio=config.harmonic_margin),
            size,
            rng,
            on_step=(lambda _, row: rows.append(row)) if config.trace else None,
        )
        return sampled.window.map, cluster

    planar_map, cluster = grow_window(
        attempt, config.window_factor, config.max_window_factor
    )
    components = complement_components(planar_map, cluster)
    LOGGER.debug(
        "Cluster of %d edges leaves %d complementary components.", size, components
    )
    if config.trace:
        _write_trace(
            config.out / "traces" / f"dla-{size}-{stream.stream_id}.csv",
            rows,
            components,
        )
    return cluster_diameter(planar_map, cluster)


@record_failure
def trial_lerw_diameter(
    *, config: ExperimentConfig, size: int, stream: RngStream
) -> float:
    """Map diameter of the first `size` edges of the tree branch to infinity."""
    sampled = sample_branch_window(
        size,
        stream.generator(),
        buffer_ratio=config.buffer_ratio,
        max_buffer_ratio=config.max_buffer_ratio,
    )
    window = sampled.window
    edges = [window.edge_index[branch.edge] for branch in sampled.branch]
    return set_diameter(window.map, edge_vertices(window.map, edges))


@record_failure
def trial_chi(*, config: ExperimentConfig, size: int, stream: RngStream) -> float:
    """Internal diameter of the window submap traced during `size` steps."""
    sampled = sample_window(
        size,
        stream.generator(),
        buffer_ratio=config.buffer_ratio,
        max_buffer_ratio=config.max_buffer_ratio,
    )
    return diameter(sampled.window.map)


@record_failure
def trial_ball_volume(
    *, config: ExperimentConfig, size: int, stream: RngStream
) -> float:
    """
    Number of vertices within distance `size` of a central vertex.

    The graph spans window_factor * size**4 steps (or cells), enough to hold the ball.
    """
    rng = stream.generator()
    length = math.ceil(config.window_factor * size**4)
    match config.graph:
        case "mullin":
            sampled = sample_window(
                length,
                rng,
                buffer_ratio=config.buffer_ratio,
                max_buffer_ratio=config.max_buffer_ratio,
            )
            graph = sampled.window.map
            center = _centre_vertex(sampled)
        case "mated-crt":
            pair = generate_walk_pair(
                PairKind.FREE,
                length * config.steps_per_unit,
                rng,
                steps_per_unit=config.steps_per_unit,
            )
            graph = build_graph(pair, config.steps_per_unit)
            center = (graph.n + 1) // 2
        case _:
            raise ValueError(f"Unsupported graph: {config.graph}")
    _, volume = ball_growth_series(graph, center, size)[-1]
    return volume


@record_failure
def trial_finite_diameter(
    *, config: ExperimentConfig, size: int, stream: RngStream
) -> float:
    """
    Diameter of a uniform spanning-tree-weighted map with `size` edges.

    With boundary "sqrt" the map has a simple boundary of length floor(sqrt(size)) and
    is rooted on a boundary edge.
    """
    rng = stream.generator()
    boundary_length = math.isqrt(size) if config.boundary == "sqrt" else 0
    for _ in range(DEFAULT_REJECTION_BUDGET):
        decorated = decode(sample_boundary_excursion(size, boundary_length, rng))
        if not boundary_length or accept_boundary_rooting(decorated, rng):
            return diameter(decorated.map)
    raise RejectionBudgetExceeded(f"No boundary-rooted map of {size} edges accepted!")


EXPERIMENT_TRIALS: Dict[str, Trial] = {
    "dla-diameter": trial_dla_diameter,
    "lerw-diameter": trial_lerw_diameter,
    "chi": trial_chi,
    "ball-volume": trial_ball_volume,
    "finite-diameter": trial_finite_diameter,
}
