#!/usr/bin/env python

"""Sub-command: exhaustive and statistical verification suites."""

import logging

from collections import Counter
from typing import Callable, Dict, List, NamedTuple

from ..map_surgery import (
    bijection_forward,
    bijection_inverse,
    check_s_prime,
    count_s,
    count_s_prime,
    cut_distribution_dla,
    cut_distribution_lerw,
    enumerate_s,
    enumerate_s_prime,
    s_code,
    s_prime_code,
)
from ..mated_crt import (
    PairKind,
    build_graph,
    build_graph_bruteforce,
    from_lattice_walk,
    generate_walk_pair,
    pitman_graph_identity_check,
)
from ..mullin_codec import (
    decode,
    encode,
    enumerate_excursions,
    mullin_adjacency,
    sample_quadrant_excursion,
)
from ..planar_map import (
    DecoratedMap,
    PlanarMap,
    canonical_code,
    tour_successor,
    triangle_adjacency,
)
from ..helpers.rng_helper import RngStream
from ..helpers.stats_helper import binomial_z, tv_distance, two_sample_chi_square
from ..walk_engines import lerw, ust_edge_marginals, wilson_ust

LOGGER = logging.getLogger(__name__)

LAW_TOLERANCE = 1e-9
P_VALUE_FLOOR = 1e-3
Z_LIMIT = 4.0


class Check(NamedTuple):
    # pylint: disable=missing-class-docstring
    name: str
    passed: bool
    detail: str


class VerifyOptions(NamedTuple):
    """
    Sizes of the verification suites.

    Attributes:
        seed: Master seed of the statistical checks.
        max_edges: Largest map size enumerated by the bijection checks.
        samples: Samples per side of the statistical checks.
        pitman_pairs: Random walk pairs checked against the Pitman identity.
    """

    seed: int = 42
    max_edges: int = 5
    samples: int = 100_000
    pitman_pairs: int = 10_000


def _report(name: str, passed: bool, detail: str) -> Check:
    if passed:
        LOGGER.info("PASS %s: %s", name, detail)
    else:
        LOGGER.warning("FAIL %s: %s", name, detail)
    return Check(name=name, passed=passed, detail=detail)


def _tour_steps(decorated: DecoratedMap) -> Dict[int, int]:
    """Step (1-based) at which the contour tour from the root processes each dart."""
    dart = decorated.map.root_dart ^ 1
    steps = {}
    for step in range(1, decorated.map.dart_count + 1):
        steps[dart] = step
        dart = tour_successor(decorated, dart)
    return steps


def check_mullin_bijection(options: VerifyOptions) -> List[Check]:
    """Round trips on every quadrant excursion, distinct maps and the walk adjacency."""
    checks = []
    for edges in range(0, options.max_edges + 1):
        codes = set()
        walks = failures = adjacency_failures = 0
        for walk in enumerate_excursions(edges):
            walks += 1
            decorated = decode(walk)
            if encode(decorated) != walk:
                failures += 1
            codes.add(canonical_code(decorated))
            if edges:
                steps = _tour_steps(decorated)
                pairs = {
                    tuple(sorted((steps[first], steps[second])))
                    for first, second in triangle_adjacency(decorated)
                }
                mated = build_graph(from_lattice_walk(walk), 1).edges
                if pairs != mullin_adjacency(walk) or not pairs <= mated:
                    adjacency_failures += 1
        checks.append(
            _report(
                f"mullin-{edges}",
                not failures and not adjacency_failures and len(codes) == walks,
                f"{walks} walks, {len(codes)} distinct maps, {failures} round trip and "
                f"{adjacency_failures} adjacency failures",
            )
        )
    return checks


def check_cut_bijection(options: VerifyOptions) -> List[Check]:
    """Round trips between S and S' for n + m <= max_edges, and equal class counts."""
    checks = []
    for cut in range(1, options.max_edges):
        for edges in range(1, options.max_edges - cut + 1):
            total = failures = 0
            for element in enumerate_s(edges, cut):
                total += 1
                image = bijection_forward(element)
                check_s_prime(image)
                if s_code(bijection_inverse(image)) != s_code(element):
                    failures += 1
            for element in enumerate_s_prime(edges, cut):
                total += 1
                image = bijection_forward(bijection_inverse(element))
                if s_prime_code(image) != s_prime_code(element):
                    failures += 1
            checks.append(
                _report(
                    f"cut-roundtrip-{edges}-{cut}",
                    not failures,
                    f"{total} elements, {failures} failures",
                )
            )
    for edges, cut in ((2, 1), (3, 1), (3, 2)):
        first, second = count_s(edges, cut), count_s_prime(edges, cut)
        checks.append(
            _report(
                f"cut-count-{edges}-{cut}",
                first == second,
                f"|S| = {first}, |S'| = {second} (unrooted classes)",
            )
        )
    return checks


def check_cut_laws(_: VerifyOptions) -> List[Check]:
    """Exact laws of maps cut along LERW paths and DLA clusters coincide."""
    checks = []
    for cut in (1, 2):
        for edges in range(cut, 5):
            distance = tv_distance(
                cut_distribution_lerw(edges, cut), cut_distribution_dla(edges, cut)
            )
            checks.append(
                _report(
                    f"cut-law-{edges}-{cut}",
                    distance <= LAW_TOLERANCE,
                    f"TV {distance:.3g}",
                )
            )
    return checks


def check_pitman(options: VerifyOptions) -> List[Check]:
    """Pitman identity, and the stack sweep against the quadratic scan."""
    rng = RngStream(seed=options.seed, stream_id=0).generator(1)
    failures = mismatches = 0
    for index in range(options.pitman_pairs):
        cell_size = (1, 2, 5)[index % 3]
        length = cell_size * int(rng.integers(1, 200 // cell_size + 1))
        pair = generate_walk_pair(PairKind.FREE, length, rng)
        if not pitman_graph_identity_check(pair, cell_size):
            failures += 1
        if index < options.pitman_pairs // 10:
            fast = build_graph(pair, cell_size)
            if fast.edges != build_graph_bruteforce(pair, cell_size).edges:
                mismatches += 1
    return [
        _report(
            "pitman",
            not failures,
            f"{options.pitman_pairs} pairs, {failures} failures",
        ),
        _report(
            "mated-crt-stack",
            not mismatches,
            f"{mismatches} mismatches against the quadratic scan",
        ),
    ]


def _triangle() -> PlanarMap:
    # Vertices 0, 1, 2; edge e joins e and e + 1 (mod 3).
    return PlanarMap(next_darts=[5, 2, 1, 4, 3, 0], root_dart=0)


def check_lerw_triangle(options: VerifyOptions) -> List[Check]:
    """The LERW between two corners of a triangle takes the direct edge w.p. 2/3."""
    rng = RngStream(seed=options.seed, stream_id=0).generator(2)
    triangle = _triangle()
    direct = sum(
        1 for _ in range(options.samples) if len(lerw(triangle, 0, 1, rng)) == 1
    )
    z = binomial_z(direct, options.samples, 2 / 3)
    return [
        _report(
            "lerw-triangle",
            abs(z) <= Z_LIMIT,
            f"{direct}/{options.samples} direct, z = {z:.2f}",
        )
    ]


def check_ust_marginals(options: VerifyOptions) -> List[Check]:
    """Edge frequencies of Wilson's algorithm against spanning tree enumeration."""
    rng = RngStream(seed=options.seed, stream_id=0).generator(3)
    planar_map = decode(sample_quadrant_excursion(6, rng)).map
    exact = ust_edge_marginals(planar_map)
    counts: Counter = Counter()
    samples = max(1, options.samples // 10)
    for _ in range(samples):
        counts.update(wilson_ust(planar_map, 0, rng))
    worst = max(
        abs(binomial_z(counts[edge], samples, probability))
        for edge, probability in exact.items()
    )
    return [
        _report(
            "ust-marginals",
            worst <= Z_LIMIT,
            f"{samples} trees, largest |z| = {worst:.2f}",
        )
    ]


def check_cut_laws_sampled(options: VerifyOptions) -> List[Check]:
    """Signatures of maps of 20 edges cut along 5 LERW or DLA edges."""
    stream = RngStream(seed=options.seed, stream_id=0)
    lerw_counts = cut_distribution_lerw(
        20, 5, mode="monte_carlo", rng=stream.generator(4), samples=options.samples
    )
    dla_counts = cut_distribution_dla(
        20, 5, mode="monte_carlo", rng=stream.generator(5), samples=options.samples
    )
    result = two_sample_chi_square(lerw_counts, dla_counts)
    return [
        _report(
            "cut-law-sampled",
            result.p_value > P_VALUE_FLOOR,
            f"chi2 = {result.statistic:.2f} over {result.categories} categories, "
            f"p = {result.p_value:.3g} (compared by cut signature)",
        )
    ]


SUITES: Dict[str, List[Callable[[VerifyOptions], List[Check]]]] = {
    "exact": [
        check_mullin_bijection,
        check_cut_bijection,
        check_cut_laws,
        check_pitman,
    ],
    "statistical": [check_lerw_triangle, check_ust_marginals, check_cut_laws_sampled],
}
SUITES["all"] = SUITES["exact"] + SUITES["statistical"]


def run_suite(name: str, options: VerifyOptions = VerifyOptions()) -> List[Check]:
    """Runs every check of a suite; a check raising an error counts as failed."""
    if name not in SUITES:
        raise ValueError(f"Unknown suite: {name}")
    checks = []
    for check in SUITES[name]:
        LOGGER.debug("Running %s ...", check.__name__)
        try:
            checks.extend(check(options))
        except Exception as exception:  # pylint: disable=broad-except
            detail = f"{type(exception).__name__}: {exception}"
            checks.append(_report(check.__name__, False, detail))
    LOGGER.info(
        "Suite %s: %d of %d checks passed.",
        name,
        sum(check.passed for check in checks),
        len(checks),
    )
    return checks
