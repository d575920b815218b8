#!/usr/bin/env python

# pylint: disable=redefined-outer-name

"""Configures execution of pytest."""

from pathlib import Path

import numpy as np
import pytest

from treemap_growth.helpers.rng_helper import RngStream
from treemap_growth.planar_map import PlanarMap


def path_map(edges: int) -> PlanarMap:
    """Path on vertices 0..edges; edge e joins e and e + 1, dart 2e sits at vertex e."""
    next_darts = list(range(2 * edges))
    for vertex in range(1, edges):
        next_darts[2 * vertex - 1], next_darts[2 * vertex] = 2 * vertex, 2 * vertex - 1
    return PlanarMap(next_darts=next_darts, root_dart=0)


@pytest.fixture
def triangle() -> PlanarMap:
    """Vertices 0, 1, 2; edge e joins e and e + 1 (mod 3)."""
    return PlanarMap(next_darts=[5, 2, 1, 4, 3, 0], root_dart=0)


@pytest.fixture
def single_edge() -> PlanarMap:
    """Two vertices joined by one edge."""
    return PlanarMap(next_darts=[0, 1], root_dart=0)


@pytest.fixture
def self_loop() -> PlanarMap:
    """One vertex carrying a loop."""
    return PlanarMap(next_darts=[1, 0], root_dart=0)


@pytest.fixture
def path_of_three() -> PlanarMap:
    """Path with three edges."""
    return path_map(3)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return RngStream(seed=1234, stream_id=0).generator()


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Flat configuration file for a small finite-diameter run."""
    path = tmp_path.joinpath("finite.conf")
    path.write_text(
        "# small run\nexperiment = finite-diameter\nsizes = 4,8,16\ntrials = 3\nseed = 7\n",
        encoding="utf-8",
    )
    return path
