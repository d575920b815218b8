#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""DLA engine tests."""

import pytest

from treemap_growth.dla_engine import (
    DlaCluster,
    cluster_code,
    cluster_diameter,
    complement_components,
    dla_mode_exact_distribution,
    dla_run,
    dla_step,
)
from treemap_growth.errors import TargetAbsorbed, TooLarge
from treemap_growth.mullin_codec import decode, enumerate_excursions
from treemap_growth.planar_map import PlanarMap
from treemap_growth.walk_engines import HarmonicPolicy

from .conftest import path_map


def test_cluster_growth():
    """Test that clusters only grow onto new vertices."""
    cluster = DlaCluster(seed=3)
    assert len(cluster) == 0
    assert cluster.vertices == (3,)
    grown = cluster.grow(5, 4)
    assert grown.edges == ((5, 1),)
    assert grown.vertex_set == frozenset({3, 4})
    with pytest.raises(ValueError):
        grown.grow(6, 3)
    with pytest.raises(ValueError):
        DlaCluster(seed=0, edges=((0, 1),), vertices=(0,))


def test_run_on_path(rng):
    """Test that growth on a path follows the path and reports each step."""
    planar_map = path_map(4)
    rows = []
    cluster = dla_run(planar_map, 0, 4, 3, rng, on_step=lambda _, row: rows.append(row))
    assert cluster.vertices == (0, 1, 2, 3)
    assert [edge for edge, _ in cluster.edges] == [0, 1, 2]
    assert [(row.step, row.edge, row.u, row.v, row.diameter) for row in rows] == [
        (1, 0, 0, 1, 1),
        (2, 1, 1, 2, 2),
        (3, 2, 2, 3, 3),
    ]
    assert cluster_diameter(planar_map, cluster) == 3
    with pytest.raises(TargetAbsorbed):
        dla_run(planar_map, 0, 4, 5, rng)
    with pytest.raises(ValueError):
        dla_run(planar_map, 0, 4, -1, rng)


def test_step_towards_infinity(rng):
    """Test that policy targets and simulated walks grow along the only available edge."""
    planar_map = path_map(10)
    cluster = DlaCluster(seed=0)
    grown = dla_step(planar_map, cluster, HarmonicPolicy(min_ratio=1.0), rng)
    assert grown.vertices == (0, 1)
    assert dla_step(planar_map, cluster, 10, rng, dense_limit=0).vertices == (0, 1)
    with pytest.raises(TargetAbsorbed):
        dla_step(planar_map, cluster, 0, rng)
    with pytest.raises(TypeError):
        dla_step(planar_map, cluster, "far", rng)


def test_complement_components():
    """Test counting the components left after removing the cluster."""
    planar_map = path_map(4)
    cluster = DlaCluster(seed=2, edges=((1, 1), (2, 2)), vertices=(2, 1, 3))
    assert complement_components(planar_map, cluster) == 2
    assert complement_components(planar_map, DlaCluster(seed=0)) == 1


def test_exact_law_on_triangle(triangle: PlanarMap):
    """Test the exact cluster law on the triangle, absorption included."""
    law = dla_mode_exact_distribution(triangle, 0, 1, 1)
    probabilities = sorted(outcome.probability for outcome in law.outcomes.values())
    assert probabilities == pytest.approx([1 / 3, 2 / 3])
    assert law.absorbed == 0

    law = dla_mode_exact_distribution(triangle, 0, 1, 2)
    assert law.absorbed == pytest.approx(2 / 3)
    probabilities = sorted(outcome.probability for outcome in law.outcomes.values())
    assert probabilities == pytest.approx([1 / 6, 1 / 6])


def test_exact_law_keys(triangle: PlanarMap):
    """Test that outcomes are keyed by the code of their cluster."""
    law = dla_mode_exact_distribution(triangle, 0, 1, 1)
    for key, outcome in law.outcomes.items():
        assert key == cluster_code(triangle, outcome.cluster, 1)


@pytest.mark.parametrize("steps", [1, 2, 3])
def test_exact_law_is_normalized(steps: int):
    """Test that outcome and absorption probabilities sum to one."""
    for walk in list(enumerate_excursions(3))[::7]:
        planar_map = decode(walk).map
        if planar_map.vertex_count < 2:
            continue
        target = planar_map.vertex_count - 1
        law = dla_mode_exact_distribution(planar_map, 0, target, steps)
        outcomes = law.outcomes.values()
        total = law.absorbed + sum(outcome.probability for outcome in outcomes)
        assert total == pytest.approx(1.0)


def test_exact_law_limits(triangle: PlanarMap):
    """Test the size limits of the exact expansion."""
    with pytest.raises(TooLarge):
        dla_mode_exact_distribution(path_map(7), 0, 7, 1)
    with pytest.raises(TooLarge):
        dla_mode_exact_distribution(triangle, 0, 1, 4)
    with pytest.raises(TargetAbsorbed):
        dla_mode_exact_distribution(triangle, 1, 1, 1)
