#!/usr/bin/env python

"""Edge-based external diffusion-limited aggregation on planar maps."""

import logging
import time

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, NamedTuple, Optional, Tuple, Union

import numpy as np

from .consts import DENSE_SOLVE_LIMIT, DLA_EXACT_MAX_EDGES, DLA_EXACT_MAX_STEPS
from .errors import TargetAbsorbed, TooLarge
from .planar_map import (
    PlanarMap,
    canonical_code,
    eccentricity,
    set_diameter,
)
from .walk_engines import (
    HarmonicPolicy,
    harmonic_measure_exact,
    pick_far_target,
    srw_last_dart,
)

LOGGER = logging.getLogger(__name__)

Target = Union[int, HarmonicPolicy]


@dataclass(frozen=True)
class DlaCluster:
    """
    Tree cluster grown from a seed vertex.

    Attributes:
        seed: The seed vertex.
        edges: (edge, step) pairs in order of addition, steps counting from one.
        vertices: The seed followed by the new endpoint of each edge.
    """

    seed: int
    edges: Tuple[Tuple[int, int], ...] = ()
    vertices: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.vertices:
            object.__setattr__(self, "vertices", (self.seed,))
        if self.vertices[0] != self.seed or len(self.vertices) != len(self.edges) + 1:
            raise ValueError("Cluster needs the seed plus one vertex per edge!")

    def __len__(self) -> int:
        return len(self.edges)

    @cached_property
    def vertex_set(self) -> FrozenSet[int]:
        # pylint: disable=missing-function-docstring
        return frozenset(self.vertices)

    @cached_property
    def edge_set(self) -> FrozenSet[int]:
        # pylint: disable=missing-function-docstring
        return frozenset(edge for edge, _ in self.edges)

    def grow(self, edge: int, vertex: int) -> "DlaCluster":
        """Cluster with one more edge, reaching a vertex outside it."""
        if vertex in self.vertex_set:
            raise ValueError(f"Vertex {vertex} already lies in the cluster!")
        return DlaCluster(
            seed=self.seed,
            edges=self.edges + ((edge, len(self.edges) + 1),),
            vertices=self.vertices + (vertex,),
        )


class DlaTraceRow(NamedTuple):
    """One growth step with the resulting cluster diameter and elapsed time."""

    step: int
    edge: int
    u: int
    v: int
    diameter: int
    seconds: float


class DlaOutcome(NamedTuple):
    # pylint: disable=missing-class-docstring
    probability: float
    cluster: DlaCluster


class ExactDlaLaw(NamedTuple):
    """Law of the cluster after the requested steps, keyed by canonical code."""

    outcomes: Dict[bytes, DlaOutcome]
    absorbed: float


def dla_step(
    planar_map: PlanarMap,
    cluster: DlaCluster,
    target: Target,
    rng: np.random.Generator,
    *,
    dense_limit: int = DENSE_SOLVE_LIMIT,
    cluster_diameter: Optional[int] = None,
) -> DlaCluster:
    """
    Adds the edge through which a random walk from the target first hits the cluster.

    Args:
        planar_map: The map.
        cluster: Current cluster.
        target: A vertex outside the cluster, or a policy choosing a far vertex afresh.
        rng: Random source.
        dense_limit: Up to this many unknowns the step is drawn from the exact harmonic
                     measure; above it a single walk from the target is simulated.
        cluster_diameter: Known cluster diameter, checked against the policy margin.

    Returns:
        The grown cluster.
    """
    vertex_set = cluster.vertex_set
    match target:
        case HarmonicPolicy():
            source = pick_far_target(
                planar_map, vertex_set, target, cluster_diameter=cluster_diameter
            ).vertex
            dense_limit = min(dense_limit, target.dense_limit)
        case int():
            if target in vertex_set:
                raise TargetAbsorbed(
                    f"Target {target} absorbed after {len(cluster)} steps!"
                )
            source = target
        case _:
            raise TypeError(f"Unsupported target: {target!r}")

    if planar_map.vertex_count - len(vertex_set) <= dense_limit:
        measure = harmonic_measure_exact(
            planar_map, vertex_set, source, dense_limit=dense_limit
        )
        edge, inner = measure.sample(rng)
        first, second = planar_map.edge_endpoints(edge)
        vertex = second if first == inner else first
    else:
        dart = srw_last_dart(planar_map, source, vertex_set, rng)
        edge, vertex = dart >> 1, planar_map.tail(dart)
    return cluster.grow(edge, vertex)


def dla_run(
    planar_map: PlanarMap,
    seed: int,
    target: Target,
    steps: int,
    rng: np.random.Generator,
    *,
    dense_limit: int = DENSE_SOLVE_LIMIT,
    on_step: Optional[Callable[[DlaCluster, DlaTraceRow], None]] = None,
) -> DlaCluster:
    """
    Grows a cluster from a seed for a number of steps.

    The cluster may contain the target after the last step; a step attempted after
    that raises TargetAbsorbed.

    Args:
        on_step: Called after each step with the cluster and its trace row.
    """
    if steps < 0:
        raise ValueError("Step count must be nonnegative!")
    cluster = DlaCluster(seed=seed)
    diameter = 0
    started = time.perf_counter()
    for step in range(1, steps + 1):
        cluster = dla_step(
            planar_map,
            cluster,
            target,
            rng,
            dense_limit=dense_limit,
            cluster_diameter=diameter,
        )
        edge, _ = cluster.edges[-1]
        vertex = cluster.vertices[-1]
        first, second = planar_map.edge_endpoints(edge)
        reach = eccentricity(planar_map, vertex, within=cluster.vertex_set)
        diameter = max(diameter, reach)
        if on_step is not None:
            row = DlaTraceRow(
                step=step,
                edge=edge,
                u=second if first == vertex else first,
                v=vertex,
                diameter=diameter,
                seconds=time.perf_counter() - started,
            )
            on_step(cluster, row)
    LOGGER.debug("Cluster of %d edges grown from %d.", steps, seed)
    return cluster


def cluster_diameter(planar_map: PlanarMap, cluster: DlaCluster) -> int:
    """Diameter of the cluster vertices in the metric of the whole map."""
    return set_diameter(planar_map, cluster.vertices)


def complement_components(planar_map: PlanarMap, cluster: DlaCluster) -> int:
    """Number of connected components of the map with the cluster vertices removed."""
    remaining = set(planar_map.vertices()) - cluster.vertex_set
    count = 0
    while remaining:
        start = min(remaining)
        reached = {start}
        frontier = [start]
        while frontier:
            vertex = frontier.pop()
            for neighbor in planar_map.neighbors(vertex):
                if neighbor in remaining and neighbor not in reached:
                    reached.add(neighbor)
                    frontier.append(neighbor)
        remaining -= reached
        count += 1
    return count


def dla_mode_exact_distribution(
    planar_map: PlanarMap,
    seed: int,
    target: int,
    steps: int,
    *,
    key: Optional[Callable[[DlaCluster], bytes]] = None,
) -> ExactDlaLaw:
    """
    Exact law of the cluster after `steps` steps targeted at a vertex.

    Clusters are merged by canonical code of the map rooted at its root dart with the
    cluster edges, seed and target marked, or by `key` when given. Paths on which a
    step is attempted with the target already absorbed contribute to `absorbed`.
    """
    if planar_map.edge_count > DLA_EXACT_MAX_EDGES or steps > DLA_EXACT_MAX_STEPS:
        raise TooLarge(
            f"Exact expansion limited to {DLA_EXACT_MAX_EDGES} edges and "
            f"{DLA_EXACT_MAX_STEPS} steps!"
        )
    if seed == target:
        raise TargetAbsorbed("Seed and target coincide!")

    def code(cluster: DlaCluster) -> bytes:
        if key is not None:
            return key(cluster)
        return cluster_code(planar_map, cluster, target)

    level: Dict[bytes, DlaOutcome] = {}
    start = DlaCluster(seed=seed)
    level[code(start)] = DlaOutcome(probability=1.0, cluster=start)
    absorbed = 0.0
    for _ in range(steps):
        expanded: Dict[bytes, DlaOutcome] = {}
        for probability, cluster in level.values():
            if target in cluster.vertex_set:
                absorbed += probability
                continue
            measure = harmonic_measure_exact(planar_map, cluster.vertex_set, target)
            candidates = zip(measure.candidate_edges, measure.probabilities)
            for (edge, inner), step in candidates:
                if step == 0:
                    continue
                first, second = planar_map.edge_endpoints(edge)
                grown = cluster.grow(edge, second if first == inner else first)
                outcome_key = code(grown)
                previous = expanded.get(outcome_key)
                if previous is None:
                    previous = DlaOutcome(probability=0.0, cluster=grown)
                expanded[outcome_key] = previous._replace(
                    probability=previous.probability + probability * float(step)
                )
        level = expanded
    return ExactDlaLaw(outcomes=level, absorbed=absorbed)


def cluster_code(planar_map: PlanarMap, cluster: DlaCluster, target: int) -> bytes:
    """Key of a sampled cluster in the law returned by dla_mode_exact_distribution()."""
    return canonical_code(
        planar_map, tree_edges=cluster.edge_set, marks=(cluster.seed, target)
    )
