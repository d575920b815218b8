#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""Map surgery tests."""

import pytest

from treemap_growth.errors import EmptyCut, NotATree, NotInS, NotInSPrime, TooLarge
from treemap_growth.helpers.stats_helper import tv_distance
from treemap_growth.map_surgery import (
    SElement,
    SPrimeElement,
    bijection_forward,
    bijection_inverse,
    check_s_prime,
    count_s,
    count_s_prime,
    cut_along_tree,
    cut_distribution_dla,
    cut_distribution_lerw,
    enumerate_s,
    enumerate_s_prime,
    format_s_element,
    format_s_prime_element,
    s_code,
    s_element_from_record,
    s_path,
    s_prime_code,
    s_prime_element_from_record,
)
from treemap_growth.mullin_codec import LatticeWalk, WalkKind, decode
from treemap_growth.planar_map import PlanarMap, parse_map

from .conftest import path_map


def test_cut_single_edge():
    """Test that cutting one edge doubles it and opens a slit of length two."""
    planar_map = path_map(2)
    result = cut_along_tree(planar_map, [0])
    cut = result.boundary_map.map
    assert (cut.vertex_count, cut.edge_count, cut.face_count) == (3, 3, 2)
    assert result.boundary_map.boundary_length == 2
    assert result.boundary_map.boundary_edges == frozenset({0, 2})
    assert all(len(copies) == 1 for copies in result.vertex_lift)


def test_cut_splits_inner_vertices():
    """Test that a vertex inside the cut path gets one copy per side."""
    planar_map = path_map(3)
    result = cut_along_tree(planar_map, [0, 1], marks=(3,))
    cut = result.boundary_map.map
    assert (cut.vertex_count, cut.edge_count, cut.face_count) == (5, 5, 2)
    assert result.boundary_map.boundary_length == 4
    assert result.boundary_map.is_simple()
    assert [len(copies) for copies in result.vertex_lift] == [1, 2, 1, 1]
    assert result.boundary_map.marked_vertices == result.vertex_lift[3]
    with pytest.raises(ValueError):
        cut_along_tree(planar_map, [0, 1], marks=(1,))


def test_cut_errors(triangle: PlanarMap):
    """Test that only nonempty trees can be cut."""
    with pytest.raises(EmptyCut):
        cut_along_tree(triangle, [])
    with pytest.raises(NotATree):
        cut_along_tree(triangle, [0, 1, 2])
    with pytest.raises(NotATree):
        cut_along_tree(path_map(3), [0, 2])


def test_s_membership():
    """Test the membership conditions of both sides of the bijection."""
    decorated = decode(LatticeWalk.from_string("RL", kind=WalkKind.QUADRANT_EXCURSION))
    with pytest.raises(NotInS):
        s_path(SElement(decorated=decorated, u=0, v=1, w=1))
    with pytest.raises(NotInS):
        s_path(SElement(decorated=decorated, u=0, v=0, w=5))
    with pytest.raises(NotInSPrime):
        check_s_prime(SPrimeElement(decorated=decorated, w_prime=0, v_prime=1))


@pytest.mark.parametrize("edges,cut", [(2, 1), (3, 1), (3, 2)])
def test_forward_round_trip(edges: int, cut: int):
    """Test that cutting then gluing gives back every element."""
    count = 0
    for element in enumerate_s(edges, cut):
        image = bijection_forward(element)
        assert image.decorated.boundary_view().boundary_length == 2 * cut
        assert image.decorated.map.edge_count == edges + cut
        check_s_prime(image)
        assert s_code(bijection_inverse(image)) == s_code(element)
        count += 1
    assert count > 0


@pytest.mark.parametrize("edges,cut", [(2, 1), (3, 1), (3, 2)])
def test_inverse_round_trip(edges: int, cut: int):
    """Test that gluing then cutting gives back every element."""
    for element in enumerate_s_prime(edges, cut):
        restored = bijection_forward(bijection_inverse(element))
        assert s_prime_code(restored) == s_prime_code(element)


@pytest.mark.parametrize("edges,cut", [(2, 1), (3, 1), (3, 2)])
def test_class_counts(edges: int, cut: int):
    """Test that both sides have the same number of isomorphism classes."""
    assert count_s(edges, cut) == count_s_prime(edges, cut)


@pytest.mark.parametrize("edges,cut", [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)])
def test_exact_cut_laws_agree(edges: int, cut: int):
    """Test that maps cut along loop-erased paths and along DLA clusters have the same law."""
    lerw_law = cut_distribution_lerw(edges, cut)
    dla_law = cut_distribution_dla(edges, cut)
    assert sum(lerw_law.values()) == pytest.approx(1.0)
    assert tv_distance(lerw_law, dla_law) <= 1e-9


def test_cut_law_arguments(rng):
    """Test argument checks and the sampled mode of the cut laws."""
    with pytest.raises(TooLarge):
        cut_distribution_lerw(5, 1)
    with pytest.raises(EmptyCut):
        cut_distribution_dla(3, 0)
    with pytest.raises(ValueError):
        cut_distribution_lerw(3, 1, mode="approximate")
    counts = cut_distribution_lerw(12, 2, mode="monte_carlo", rng=rng, samples=40)
    assert sum(counts.values()) == 40
    assert all(len(key) == 3 for key in counts)
    counts = cut_distribution_dla(12, 2, mode="monte_carlo", rng=rng, samples=40)
    assert sum(counts.values()) == 40


def test_element_records():
    """Test that elements survive their text form."""
    element = next(iter(enumerate_s(2, 1)))
    record = parse_map(format_s_element(element))
    assert s_code(s_element_from_record(record)) == s_code(element)
    image = bijection_forward(element)
    record = parse_map(format_s_prime_element(image))
    assert s_prime_code(s_prime_element_from_record(record)) == s_prime_code(image)
    with pytest.raises(NotInS):
        s_element_from_record(parse_map(format_s_prime_element(image)))


def test_wired_elements_are_not_in_s():
    """Test that maps with a boundary are rejected on the S side."""
    image = bijection_forward(next(iter(enumerate_s(2, 1))))
    with pytest.raises(NotInS):
        s_path(SElement(decorated=image.decorated, u=0, v=1, w=2))
