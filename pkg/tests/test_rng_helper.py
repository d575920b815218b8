#!/usr/bin/env python

"""Random stream tests."""

import numpy as np

from treemap_growth.helpers.rng_helper import RngStream, UniformBuffer


def test_streams_are_reproducible():
    """Test that equal identifiers give equal sequences."""
    first = RngStream(seed=5, stream_id=3).generator().random(8)
    second = RngStream(seed=5, stream_id=3).generator().random(8)
    assert np.array_equal(first, second)


def test_streams_are_distinct():
    """Test that seeds, stream ids and keys all change the sequence."""
    reference = RngStream(seed=5, stream_id=3).generator().random(8)
    for other in (
        RngStream(seed=6, stream_id=3).generator(),
        RngStream(seed=5, stream_id=4).generator(),
        RngStream(seed=5, stream_id=3).generator(1),
    ):
        assert not np.array_equal(reference, other.random(8))


def test_uniform_buffer():
    """Test that buffered uniforms follow the generator across block boundaries."""
    expected = np.random.default_rng(3).random(10).tolist()
    buffer = UniformBuffer(np.random.default_rng(3), block=4)
    values = [buffer() for _ in range(10)]
    assert values[:4] == expected[:4]
    assert all(0 <= value < 1 for value in values)
    assert len(set(values)) == 10
