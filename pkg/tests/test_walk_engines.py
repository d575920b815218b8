#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""Random walk, harmonic measure and spanning tree tests."""

from collections import Counter

import numpy as np
import pytest

from treemap_growth.errors import MarginTooSmall, TooLarge
from treemap_growth.helpers.stats_helper import binomial_z
from treemap_growth.mullin_codec import (
    decode,
    enumerate_excursions,
    sample_quadrant_excursion,
)
from treemap_growth.planar_map import DecoratedMap, PlanarMap
from treemap_growth.walk_engines import (
    HarmonicPolicy,
    candidate_edges,
    green_function,
    harmonic_measure_exact,
    harmonic_measure_from_infinity,
    harmonic_stability,
    laplacian_lerw,
    lerw,
    lerw_distribution_by_harmonic,
    lerw_distribution_by_trees,
    loop_erase,
    pick_far_target,
    spanning_trees,
    srw_last_dart,
    srw_until_hit,
    ust_edge_marginals,
    wilson_ust,
)

from .conftest import path_map


def _kirchhoff(planar_map: PlanarMap) -> int:
    """Spanning tree count from the reduced Laplacian; loops drop out."""
    laplacian = np.zeros((planar_map.vertex_count, planar_map.vertex_count))
    for edge in range(planar_map.edge_count):
        first, second = planar_map.edge_endpoints(edge)
        if first != second:
            laplacian[first, first] += 1
            laplacian[second, second] += 1
            laplacian[first, second] -= 1
            laplacian[second, first] -= 1
    if planar_map.vertex_count == 1:
        return 1
    return int(round(np.linalg.det(laplacian[1:, 1:])))


def test_triangle_harmonic_measure(triangle: PlanarMap):
    """Test the entrance law of the triangle seen from a neighbour of the cluster."""
    measure = harmonic_measure_exact(triangle, {0}, 1)
    assert measure.candidate_edges == ((0, 0), (2, 0))
    assert measure.probabilities == pytest.approx([2 / 3, 1 / 3], abs=1e-12)
    assert measure.edge_law() == pytest.approx({0: 2 / 3, 2: 1 / 3})
    with pytest.raises(ValueError):
        harmonic_measure_exact(triangle, {0}, 0)


def test_green_function(path_of_three: PlanarMap):
    """Test expected visits of a walk from the far end of a path killed at vertex 0."""
    green = green_function(path_of_three, {0}, 3)
    assert green == pytest.approx({1: 2.0, 2: 4.0, 3: 3.0})
    iterative = green_function(path_of_three, {0}, 3, dense_limit=0)
    assert iterative == pytest.approx(green, abs=1e-11)


def test_candidate_edges(triangle: PlanarMap):
    """Test that candidates are edges leaving the cluster."""
    assert candidate_edges(triangle, {0, 1}) == [(1, 1, 2), (2, 0, 2)]


def test_harmonic_measure_matches_walks(rng):
    """Test that the exact law matches simulated entrance edges."""
    planar_map = decode(sample_quadrant_excursion(12, rng)).map
    cluster = {0}
    source = max(planar_map.vertices())
    if source in cluster:
        pytest.skip("Map has a single vertex")
    measure = harmonic_measure_exact(planar_map, cluster, source)
    assert float(measure.probabilities.sum()) == pytest.approx(1.0)
    samples = 4000
    counts = Counter(
        srw_last_dart(planar_map, source, cluster, rng) >> 1 for _ in range(samples)
    )
    for edge, probability in measure.edge_law().items():
        if 0 < probability < 1:
            assert abs(binomial_z(counts[edge], samples, probability)) < 4.5


def test_dense_and_iterative_solves_agree(rng):
    """Test that the iterative solve reproduces the dense one."""
    planar_map = decode(sample_quadrant_excursion(20, rng)).map
    source = planar_map.vertex_count - 1
    dense = harmonic_measure_exact(planar_map, {0}, source)
    iterative = harmonic_measure_exact(planar_map, {0}, source, dense_limit=0)
    assert iterative.candidate_edges == dense.candidate_edges
    assert iterative.probabilities == pytest.approx(dense.probabilities, abs=1e-10)


def test_srw_until_hit(path_of_three: PlanarMap, rng):
    """Test that walks stop on their first visit to the target set."""
    darts = srw_until_hit(path_of_three, 0, [3], rng)
    assert path_of_three.head(darts[-1]) == 3
    assert all(path_of_three.head(dart) != 3 for dart in darts[:-1])
    assert srw_until_hit(path_of_three, 3, [3], rng) == []
    with pytest.raises(ValueError):
        srw_last_dart(path_of_three, 3, {3}, rng)


def test_loop_erase(triangle: PlanarMap):
    """Test chronological loop erasure on the triangle."""
    # 0 -> 1 -> 2 -> 0 -> 1 erases to the single edge 0 -> 1.
    assert loop_erase(triangle, 0, [0, 2, 4, 0]) == [0]
    # 0 -> 2 -> 1 is already simple.
    assert loop_erase(triangle, 0, [5, 3]) == [5, 3]


def test_lerw_triangle(triangle: PlanarMap, rng):
    """Test that the loop-erased walk uses the direct edge with probability 2/3."""
    samples = 6000
    direct = sum(1 for _ in range(samples) if len(lerw(triangle, 0, 1, rng)) == 1)
    assert abs(binomial_z(direct, samples, 2 / 3)) < 4
    with pytest.raises(ValueError):
        lerw(triangle, 0, 0, rng)


def test_lerw_towards_far_vertex(rng):
    """Test that a policy target runs the walk to the farthest vertex."""
    planar_map = path_map(4)
    path = lerw(planar_map, 0, HarmonicPolicy(min_ratio=0.0), rng)
    assert [dart >> 1 for dart in path] == [0, 1, 2, 3]


def test_laplacian_lerw_is_simple(rng):
    """Test that the tip-growth construction yields simple paths to the target."""
    planar_map = decode(sample_quadrant_excursion(8, rng)).map
    if planar_map.vertex_count < 2:
        pytest.skip("Map has a single vertex")
    target = planar_map.vertex_count - 1
    path = laplacian_lerw(planar_map, 0, target, rng)
    visited = [0] + [planar_map.head(dart) for dart in path]
    assert visited[-1] == target
    assert len(set(visited)) == len(visited)


@pytest.mark.parametrize("edges", [2, 3])
def test_lerw_laws_agree(edges: int):
    """Test that the loop-erased path law equals the spanning tree path law."""
    for walk in enumerate_excursions(edges):
        planar_map = decode(walk).map
        if planar_map.vertex_count < 2:
            continue
        target = planar_map.vertex_count - 1
        by_trees = lerw_distribution_by_trees(planar_map, 0, target)
        by_harmonic = lerw_distribution_by_harmonic(planar_map, 0, target)
        support = {key for key, value in by_harmonic.items() if value > 1e-12}
        assert set(by_trees) == support
        for key, value in by_trees.items():
            assert by_harmonic[key] == pytest.approx(value, abs=1e-9)


def test_spanning_trees_count(triangle: PlanarMap):
    """Test that enumerated spanning trees match the matrix-tree theorem."""
    assert len(list(spanning_trees(triangle))) == 3
    for walk in enumerate_excursions(3):
        planar_map = decode(walk).map
        assert len(list(spanning_trees(planar_map))) == _kirchhoff(planar_map)
    with pytest.raises(TooLarge):
        list(spanning_trees(triangle, cap=2))


def test_wilson_ust(rng):
    """Test that Wilson's algorithm returns spanning trees with the exact edge marginals."""
    planar_map = decode(sample_quadrant_excursion(5, rng)).map
    exact = ust_edge_marginals(planar_map)
    assert sum(exact.values()) == pytest.approx(planar_map.vertex_count - 1)
    samples = 4000
    counts: Counter = Counter()
    for _ in range(samples):
        tree = wilson_ust(planar_map, 0, rng)
        DecoratedMap(map=planar_map, tree_edges=tree)
        counts.update(tree)
    for edge, probability in exact.items():
        assert abs(binomial_z(counts[edge], samples, probability)) < 4.5


def test_pick_far_target():
    """Test far target selection and the margin check."""
    planar_map = path_map(6)
    target = pick_far_target(planar_map, {0, 1}, HarmonicPolicy(min_ratio=2.0))
    assert target == (6, 5)
    policy = HarmonicPolicy(min_ratio=0.0, target_distance=2)
    assert pick_far_target(planar_map, {0}, policy).vertex == 2
    with pytest.raises(MarginTooSmall):
        pick_far_target(planar_map, {0, 1, 2}, HarmonicPolicy(min_ratio=3.0))
    with pytest.raises(MarginTooSmall):
        pick_far_target(
            planar_map, set(planar_map.vertices()), HarmonicPolicy(min_ratio=0.0)
        )


def test_harmonic_from_infinity(rng):
    """Test that the measure from the farthest vertex is a law and stability is reported per distance."""
    planar_map = decode(sample_quadrant_excursion(30, rng)).map
    measure = harmonic_measure_from_infinity(
        planar_map, {0}, HarmonicPolicy(min_ratio=0.0)
    )
    assert measure.margin >= 1
    assert float(measure.probabilities.sum()) == pytest.approx(1.0)
    points = harmonic_stability(planar_map, {0}, [1, measure.margin])
    assert points[-1].tv_to_farthest == pytest.approx(0.0, abs=1e-12)
    assert all(0 <= point.tv_to_farthest <= 1 for point in points)
