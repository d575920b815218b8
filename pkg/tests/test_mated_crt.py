#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""Mated-CRT map tests."""

import numpy as np
import pytest

from treemap_growth.errors import BadLength, InvalidWalk, RejectionBudgetExceeded
from treemap_growth.mated_crt import (
    MatedCrtGraph,
    PairKind,
    WalkPair,
    ball_growth_series,
    boundary_sets,
    build_graph,
    build_graph_bruteforce,
    format_graph,
    from_lattice_walk,
    generate_walk_pair,
    negate,
    parse_graph,
    pitman_graph_identity_check,
    pitman_transform,
)
from treemap_growth.mullin_codec import (
    LatticeWalk,
    WalkKind,
    enumerate_excursions,
    mullin_adjacency,
)


@pytest.fixture
def increasing_pair() -> WalkPair:
    """Both coordinates strictly increasing: no time repeats a value."""
    return WalkPair(left=range(5), right=range(5))


def test_pair_validation():
    """Test that pairs need equal lengths and unit increments."""
    with pytest.raises(InvalidWalk):
        WalkPair(left=[0, 2], right=[0, 1])
    with pytest.raises(InvalidWalk):
        WalkPair(left=[0, 1, 2], right=[0, 1])
    with pytest.raises(InvalidWalk):
        WalkPair(left=[], right=[])
    assert len(WalkPair(left=[0, 1, 0], right=[0, -1, -1])) == 2


def test_increasing_pair_is_a_path(increasing_pair: WalkPair):
    """Test that without repeated values only consecutive cells are adjacent."""
    graph = build_graph(increasing_pair, 1)
    assert graph.n == 4
    assert graph.edges == frozenset({(1, 2), (2, 3), (3, 4)})
    assert build_graph(increasing_pair, 2).edges == frozenset({(1, 2)})


def test_equal_values_join_cells():
    """Test adjacency through equal values with nothing lower in between."""
    pair = WalkPair(left=[0, 1, 2, 1, 2, 3, 4], right=range(7))
    expected = {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3), (1, 4), (2, 4)}
    assert build_graph(pair, 1).edges == frozenset(expected)
    assert build_graph_bruteforce(pair, 1).edges == frozenset(expected)


def test_bad_lengths(increasing_pair: WalkPair):
    """Test that the walk length must be a positive multiple of the cell size."""
    with pytest.raises(BadLength):
        build_graph(increasing_pair, 3)
    with pytest.raises(BadLength):
        build_graph(increasing_pair, 0)


@pytest.mark.parametrize("cell_size", [1, 2, 3, 5])
def test_stack_matches_bruteforce(cell_size: int, rng):
    """Test that the stack construction equals the quadratic scan on random pairs."""
    for _ in range(50):
        length = cell_size * int(rng.integers(1, 40))
        pair = generate_walk_pair(PairKind.FREE, length, rng)
        fast = build_graph(pair, cell_size)
        slow = build_graph_bruteforce(pair, cell_size)
        assert fast.edges == slow.edges
        assert all((cell, cell + 1) in fast.edges for cell in range(1, fast.n))


@pytest.mark.parametrize("cell_size", [1, 2, 5])
def test_pitman_identity(cell_size: int, rng):
    """Test that the Pitman transform and the negated pair give the same graph."""
    for _ in range(100):
        length = cell_size * int(rng.integers(1, 60))
        pair = generate_walk_pair(PairKind.FREE, length, rng)
        assert pitman_graph_identity_check(pair, cell_size)


def test_pitman_transform():
    """Test the Pitman transform by hand."""
    pair = WalkPair(left=[0, -1, 0, 1, 0], right=[0, 1, 2, 1, 0])
    transformed = pitman_transform(pair)
    assert transformed.left.tolist() == [0, 1, 0, 1, 2]
    assert transformed.right.tolist() == [0, 1, 2, 3, 4]
    assert negate(pair).left.tolist() == [0, 1, 0, -1, 0]


def test_boundary_sets(increasing_pair: WalkPair):
    """Test that the ends of an interval lie on its boundary."""
    lower, upper = boundary_sets(increasing_pair, 1)
    assert 1 in lower
    assert 4 in upper
    lower, upper = boundary_sets(increasing_pair, 1, (2, 3))
    assert lower <= {2, 3}
    assert 2 in lower
    assert 3 in upper
    graph = build_graph(increasing_pair, 1)
    assert graph.boundary == graph.lower | graph.upper


def test_generate_pairs(rng):
    """Test the free and quadrant-conditioned pair generators."""
    pair = generate_walk_pair(PairKind.FREE, 30, rng, steps_per_unit=3)
    assert len(pair) == 30
    assert pair.steps_per_unit == 3
    assert set(np.abs(np.diff(pair.left)).tolist()) == {1}
    pair = generate_walk_pair(PairKind.QUADRANT_CONDITIONED, 40, rng)
    assert pair.left.min() >= 0 and pair.right.min() >= 0
    with pytest.raises(RejectionBudgetExceeded):
        generate_walk_pair(PairKind.QUADRANT_CONDITIONED, 40, rng, budget=1)
    with pytest.raises(ValueError):
        generate_walk_pair(PairKind.MULLIN, 10, rng)
    with pytest.raises(ValueError):
        generate_walk_pair(PairKind.FREE, 0, rng)


def test_from_lattice_walk():
    """Test that lattice walks give pairs moving one coordinate at a time."""
    walk = LatticeWalk.from_string("RULD", kind=WalkKind.QUADRANT_EXCURSION)
    pair = from_lattice_walk(walk)
    assert pair.left.tolist() == [0, 1, 1, 0, 0]
    assert pair.right.tolist() == [0, 0, 1, 1, 0]
    assert pair.kind is PairKind.MULLIN


@pytest.mark.parametrize("edges", [1, 2, 3])
def test_mullin_adjacency_is_contained(edges: int):
    """Test that walk step adjacency is contained in the mated-CRT graph of the walk."""
    for walk in enumerate_excursions(edges):
        assert mullin_adjacency(walk) <= build_graph(from_lattice_walk(walk), 1).edges


def test_ball_growth(increasing_pair: WalkPair):
    """Test ball sizes on a path of cells."""
    graph = build_graph(increasing_pair, 1)
    assert ball_growth_series(graph, 1, 2) == [(0, 1), (1, 2), (2, 3)]
    assert ball_growth_series(graph, 2, 5)[-1] == (5, 4)
    with pytest.raises(ValueError):
        ball_growth_series(graph, 1, 0)


def test_graph_records(rng):
    """Test that parse_graph() reads back what format_graph() writes."""
    graph = build_graph(generate_walk_pair(PairKind.FREE, 40, rng), 2)
    parsed = parse_graph(format_graph(graph))
    assert isinstance(parsed, MatedCrtGraph)
    assert (parsed.n, parsed.cell_size) == (graph.n, graph.cell_size)
    assert parsed.edges == graph.edges
    assert (parsed.lower, parsed.upper) == (graph.lower, graph.upper)
    with pytest.raises(ValueError):
        parse_graph("EDGES 3 1\n")
