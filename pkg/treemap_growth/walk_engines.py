#!/usr/bin/env python

"""Random walks, harmonic measure, uniform spanning trees and loop-erased random walk on maps."""

import logging

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np

from scipy import sparse
from scipy.sparse.linalg import LinearOperator, bicgstab, spilu, spsolve

from .consts import (
    DENSE_SOLVE_LIMIT,
    ENUMERATION_MAX_EDGES,
    HARMONIC_MIN_RATIO,
    HARMONIC_SUM_TOLERANCE,
    SOLVE_RESIDUAL_TOLERANCE,
)
from .errors import MarginTooSmall, Singular, TooLarge
from .helpers.rng_helper import UniformBuffer
from .helpers.stats_helper import tv_distance
from .planar_map import PlanarMap, bfs_distances, set_diameter, tree_path_darts

LOGGER = logging.getLogger(__name__)

Candidate = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class HarmonicDistribution:
    """
    Law of the edge through which a walk first enters a cluster.

    Attributes:
        candidate_edges: (edge, endpoint in the cluster) pairs, sorted.
        probabilities: Matching probabilities, summing to one.
        source: Vertex the walk starts from.
        margin: Graph distance between the source and the cluster, when a far source was chosen.
    """

    candidate_edges: Tuple[Candidate, ...]
    probabilities: np.ndarray
    source: int
    margin: Optional[int] = None

    def as_dict(self) -> Dict[Candidate, float]:
        """Probabilities keyed by candidate."""
        pairs = zip(self.candidate_edges, self.probabilities)
        return {candidate: float(value) for candidate, value in pairs}

    def edge_law(self) -> Dict[int, float]:
        """Probabilities keyed by edge."""
        pairs = zip(self.candidate_edges, self.probabilities)
        return {edge: float(value) for (edge, _), value in pairs}

    def sample(self, rng: np.random.Generator) -> Candidate:
        """Draws one candidate."""
        index = int(rng.choice(len(self.candidate_edges), p=self.probabilities))
        return self.candidate_edges[index]


@dataclass(frozen=True)
class HarmonicPolicy:
    """
    Choice of the far source approximating harmonic measure from infinity.

    Attributes:
        min_ratio: Smallest accepted ratio between the source distance and the cluster diameter.
        target_distance: Preferred source distance; the farthest vertex is used when omitted or
                         when the window is not that deep.
        dense_limit: Unknown count above which steps are sampled by random walk instead of solved.
    """

    min_ratio: float = HARMONIC_MIN_RATIO
    target_distance: Optional[int] = None
    dense_limit: int = field(default=DENSE_SOLVE_LIMIT, compare=False)


class FarTarget(NamedTuple):
    # pylint: disable=missing-class-docstring
    vertex: int
    margin: int


class StabilityPoint(NamedTuple):
    # pylint: disable=missing-class-docstring
    distance: int
    margin: int
    tv_to_farthest: float


def srw_until_hit(
    planar_map: PlanarMap, start: int, targets: Iterable[int], rng: np.random.Generator
) -> List[int]:
    """
    Simple random walk stopped on its first visit to a vertex set.

    Each step follows a uniformly chosen dart at the current vertex, so multiple edges and loops
    count with their multiplicity.

    Returns:
        Darts traversed; empty when start is already a target.
    """
    targets = set(targets)
    if not targets:
        raise ValueError("Empty target set!")
    vertex_darts = planar_map.vertex_darts
    vertex_of = planar_map.vertex_of
    uniform = UniformBuffer(rng)
    darts = []
    vertex = start
    while vertex not in targets:
        choices = vertex_darts[vertex]
        dart = choices[int(uniform() * len(choices))]
        darts.append(dart)
        vertex = vertex_of[dart ^ 1]
    return darts


def srw_last_dart(
    planar_map: PlanarMap, start: int, targets: Set[int], rng: np.random.Generator
) -> int:
    """Last dart of srw_until_hit(), without storing the trajectory."""
    if start in targets:
        raise ValueError(f"Start vertex {start} is already a target!")
    vertex_darts = planar_map.vertex_darts
    vertex_of = planar_map.vertex_of
    uniform = UniformBuffer(rng)
    vertex = start
    dart = -1
    while vertex not in targets:
        choices = vertex_darts[vertex]
        dart = choices[int(uniform() * len(choices))]
        vertex = vertex_of[dart ^ 1]
    return dart


def candidate_edges(
    planar_map: PlanarMap, cluster: Set[int]
) -> List[Tuple[int, int, int]]:
    """(edge, inner endpoint, outer endpoint) for the edges with exactly one endpoint in the cluster."""
    result = []
    for edge in range(planar_map.edge_count):
        first, second = planar_map.edge_endpoints(edge)
        if (first in cluster) != (second in cluster):
            inner, outer = (first, second) if first in cluster else (second, first)
            result.append((edge, inner, outer))
    return result


def _outside_component(
    planar_map: PlanarMap, cluster: Set[int], source: int
) -> List[int]:
    seen = {source}
    queue = deque([source])
    while queue:
        vertex = queue.popleft()
        for neighbor in planar_map.neighbors(vertex):
            if neighbor not in cluster and neighbor not in seen:
                seen.add(neighbor)
                queue.append(neighbor)
    return sorted(seen)


def _iterative_solve(system: sparse.csr_matrix, right: np.ndarray) -> np.ndarray:
    """
    BiCGSTAB with an incomplete LU preconditioner, to a relative residual of
    SOLVE_RESIDUAL_TOLERANCE; falls back to a sparse direct solve when it stalls.
    """
    matrix = system.tocsc()
    size = matrix.shape[0]
    try:
        factor = spilu(matrix)
        preconditioner = LinearOperator(matrix.shape, factor.solve)
    except RuntimeError:
        preconditioner = None
    solution, info = bicgstab(
        matrix,
        right,
        rtol=SOLVE_RESIDUAL_TOLERANCE,
        atol=0.0,
        maxiter=10 * size,
        M=preconditioner,
    )
    if info != 0:
        LOGGER.warning(
            "BiCGSTAB stopped with status %d over %d unknowns; solving directly.",
            info,
            size,
        )
        solution = spsolve(matrix, right)
    return solution


def green_function(
    planar_map: PlanarMap,
    cluster: Set[int],
    source: int,
    *,
    dense_limit: int = DENSE_SOLVE_LIMIT,
) -> Dict[int, float]:
    """
    Expected number of visits to each vertex outside the cluster by a walk from `source` killed on
    entering the cluster.

    Solves (I - P)^T g = 1_source over the component of the complement containing the source,
    densely up to dense_limit unknowns and iteratively above.
    """
    vertices = _outside_component(planar_map, cluster, source)
    index = {vertex: position for position, vertex in enumerate(vertices)}
    rows, columns, values = [], [], []
    for vertex in vertices:
        weight = 1.0 / planar_map.degree(vertex)
        for neighbor in planar_map.neighbors(vertex):
            if neighbor in index:
                rows.append(index[vertex])
                columns.append(index[neighbor])
                values.append(weight)
    size = len(vertices)
    transition = sparse.coo_matrix(
        (values, (rows, columns)), shape=(size, size)
    ).tocsr()
    system = (sparse.identity(size, format="csr") - transition).T
    right = np.zeros(size)
    right[index[source]] = 1.0

    if size <= dense_limit:
        try:
            solution = np.linalg.solve(system.toarray(), right)
        except np.linalg.LinAlgError as exception:
            raise Singular(
                f"Dirichlet system of {size} unknowns is singular!"
            ) from exception
    else:
        LOGGER.debug("Iterative solve over %d unknowns.", size)
        solution = _iterative_solve(system, right)
    if not np.all(np.isfinite(solution)):
        raise Singular(f"Dirichlet system of {size} unknowns has no finite solution!")
    residual = float(np.abs(system @ solution - right).max()) if size else 0.0
    if residual > HARMONIC_SUM_TOLERANCE:
        raise Singular(f"Dirichlet residual {residual:.3g} over {size} unknowns!")
    return {vertex: float(solution[index[vertex]]) for vertex in vertices}


def harmonic_measure_exact(
    planar_map: PlanarMap,
    cluster: Iterable[int],
    source: int,
    *,
    dense_limit: int = DENSE_SOLVE_LIMIT,
    margin: Optional[int] = None,
) -> HarmonicDistribution:
    """
    Exact law of the edge through which a simple random walk from `source` first enters a cluster.

    Args:
        planar_map: The map.
        cluster: Vertex set of a connected subgraph.
        source: Start vertex, outside the cluster.
        dense_limit: Largest unknown count solved densely; larger systems are solved iteratively.
        margin: Recorded on the result.

    Returns:
        The distribution over all candidate edges; those unreachable from the source get zero.
    """
    cluster = set(cluster)
    if not cluster:
        raise ValueError("Empty cluster!")
    if source in cluster:
        raise ValueError(f"Source {source} lies in the cluster!")

    green = green_function(planar_map, cluster, source, dense_limit=dense_limit)
    candidates = candidate_edges(planar_map, cluster)
    probabilities = np.array(
        [
            green.get(outer, 0.0) / planar_map.degree(outer)
            for _, _, outer in candidates
        ],
        dtype=float,
    )
    total = float(probabilities.sum())
    if abs(total - 1.0) > HARMONIC_SUM_TOLERANCE:
        raise Singular(f"Exit probabilities sum to {total!r}!")
    probabilities /= total
    order = sorted(
        range(len(candidates)), key=lambda position: candidates[position][:2]
    )
    return HarmonicDistribution(
        candidate_edges=tuple(candidates[position][:2] for position in order),
        probabilities=probabilities[order],
        source=source,
        margin=margin,
    )


def pick_far_target(
    planar_map: PlanarMap,
    cluster: Iterable[int],
    policy: HarmonicPolicy = HarmonicPolicy(),
    *,
    cluster_diameter: Optional[int] = None,
) -> FarTarget:
    """
    Source vertex approximating infinity for a cluster inside a finite window.

    The farthest vertex from the cluster is used (smallest label among ties), or the smallest vertex
    at policy.target_distance when set and available.

    Raises:
        MarginTooSmall: The source is closer than policy.min_ratio times the cluster diameter.
    """
    cluster = set(cluster)
    distances = bfs_distances(planar_map, cluster)
    deepest = max(distances.values())
    wanted = deepest
    if policy.target_distance is not None:
        wanted = min(policy.target_distance, deepest)
    if wanted == 0:
        raise MarginTooSmall("Cluster covers the whole window!")
    vertex = min(vertex for vertex, distance in distances.items() if distance == wanted)

    if cluster_diameter is None:
        cluster_diameter = set_diameter(planar_map, cluster)
    if wanted < policy.min_ratio * cluster_diameter:
        raise MarginTooSmall(
            f"Margin {wanted} below {policy.min_ratio} times "
            f"the cluster diameter {cluster_diameter}!"
        )
    return FarTarget(vertex=vertex, margin=wanted)


def harmonic_measure_from_infinity(
    planar_map: PlanarMap,
    cluster: Iterable[int],
    policy: HarmonicPolicy = HarmonicPolicy(),
    *,
    cluster_diameter: Optional[int] = None,
) -> HarmonicDistribution:
    """Harmonic measure on a cluster seen from a far vertex of the window; see pick_far_target()."""
    cluster = set(cluster)
    target = pick_far_target(
        planar_map, cluster, policy, cluster_diameter=cluster_diameter
    )
    LOGGER.debug("Far source %d at distance %d.", target.vertex, target.margin)
    return harmonic_measure_exact(
        planar_map,
        cluster,
        target.vertex,
        dense_limit=policy.dense_limit,
        margin=target.margin,
    )


def harmonic_stability(
    planar_map: PlanarMap, cluster: Iterable[int], distances: Sequence[int]
) -> List[StabilityPoint]:
    """
    Total-variation distance between harmonic measures from sources at the given distances and from
    the farthest vertex of the window.

    Margins are not checked against the cluster diameter; this is a diagnostic.
    """
    cluster = set(cluster)
    reference = harmonic_measure_from_infinity(
        planar_map, cluster, HarmonicPolicy(min_ratio=0.0), cluster_diameter=0
    ).edge_law()
    points = []
    for distance in distances:
        policy = HarmonicPolicy(min_ratio=0.0, target_distance=distance)
        measure = harmonic_measure_from_infinity(
            planar_map, cluster, policy, cluster_diameter=0
        )
        points.append(
            StabilityPoint(
                distance=distance,
                margin=measure.margin,
                tv_to_farthest=tv_distance(measure.edge_law(), reference),
            )
        )
    return points


def loop_erase(planar_map: PlanarMap, start: int, darts: Sequence[int]) -> List[int]:
    """Chronological loop erasure of a trajectory given as darts from `start`."""
    path: List[int] = []
    position = {start: 0}
    for dart in darts:
        vertex = planar_map.head(dart)
        if vertex in position:
            cut = position[vertex]
            for removed in path[cut:]:
                del position[planar_map.head(removed)]
            del path[cut:]
            position[vertex] = cut
        else:
            path.append(dart)
            position[vertex] = len(path)
    return path


def wilson_ust(
    planar_map: PlanarMap, root: int, rng: np.random.Generator
) -> FrozenSet[int]:
    """
    Uniform spanning tree by Wilson's algorithm.

    Loop erasure is implicit: the walk from each vertex not yet in the tree records its last exit
    dart per vertex, and the path following those darts is retraced into the tree.
    """
    vertex_darts = planar_map.vertex_darts
    vertex_of = planar_map.vertex_of
    uniform = UniformBuffer(rng)
    in_tree = [False] * planar_map.vertex_count
    in_tree[root] = True
    exit_dart = [-1] * planar_map.vertex_count
    edges = set()
    for start in planar_map.vertices():
        vertex = start
        while not in_tree[vertex]:
            choices = vertex_darts[vertex]
            dart = choices[int(uniform() * len(choices))]
            exit_dart[vertex] = dart
            vertex = vertex_of[dart ^ 1]
        vertex = start
        while not in_tree[vertex]:
            in_tree[vertex] = True
            dart = exit_dart[vertex]
            edges.add(dart >> 1)
            vertex = vertex_of[dart ^ 1]
    return frozenset(edges)


def lerw(
    planar_map: PlanarMap,
    start: int,
    target: Union[int, HarmonicPolicy],
    rng: np.random.Generator,
) -> List[int]:
    """
    Loop-erased random walk from `start` to a vertex, or towards infinity through a far vertex.

    Returns:
        Darts of the simple path; [dart >> 1 for dart in path] are its edges.
    """
    if isinstance(target, HarmonicPolicy):
        target = pick_far_target(planar_map, [start], target, cluster_diameter=0).vertex
    if target == start:
        raise ValueError("Loop-erased walk needs distinct endpoints!")
    darts = srw_until_hit(planar_map, start, [target], rng)
    return loop_erase(planar_map, start, darts)


def laplacian_lerw(
    planar_map: PlanarMap, start: int, target: int, rng: np.random.Generator
) -> List[int]:
    """
    Loop-erased random walk grown one edge at a time: each step uses an edge at the tip, with
    probability proportional to the harmonic measure of the path seen from the target.
    """
    if target == start:
        raise ValueError("Loop-erased walk needs distinct endpoints!")
    path: List[int] = []
    vertices = [start]
    while vertices[-1] != target:
        dart = _tip_law(planar_map, vertices, target).sample(rng)
        path.append(dart)
        vertices.append(planar_map.head(dart))
    return path


class _TipLaw(NamedTuple):
    darts: List[int]
    probabilities: np.ndarray

    def sample(self, rng: np.random.Generator) -> int:
        return self.darts[int(rng.choice(len(self.darts), p=self.probabilities))]


def _tip_law(planar_map: PlanarMap, vertices: List[int], target: int) -> _TipLaw:
    tip = vertices[-1]
    measure = harmonic_measure_exact(planar_map, vertices, target)
    darts, weights = [], []
    candidates = zip(measure.candidate_edges, measure.probabilities)
    for (edge, inner), probability in candidates:
        if inner == tip and probability > 0:
            first, _ = planar_map.edge_endpoints(edge)
            darts.append(2 * edge if first == tip else 2 * edge + 1)
            weights.append(probability)
    weights = np.asarray(weights)
    return _TipLaw(darts=darts, probabilities=weights / weights.sum())


def spanning_trees(
    planar_map: PlanarMap, *, cap: int = 2 * ENUMERATION_MAX_EDGES
) -> Iterator[FrozenSet[int]]:
    """All spanning trees, by edge subsets of size |V| - 1 without cycles."""
    if planar_map.edge_count > cap:
        raise TooLarge(
            f"Refusing to enumerate spanning trees of {planar_map.edge_count} edges "
            f"(cap {cap})!"
        )
    size = planar_map.vertex_count - 1
    for subset in combinations(range(planar_map.edge_count), size):
        parent = list(range(planar_map.vertex_count))

        def find(vertex: int) -> int:
            while parent[vertex] != vertex:
                parent[vertex] = parent[parent[vertex]]
                vertex = parent[vertex]
            return vertex

        for edge in subset:
            ends = planar_map.edge_endpoints(edge)
            first, second = (find(vertex) for vertex in ends)
            if first == second:
                break
            parent[first] = second
        else:
            yield frozenset(subset)


def lerw_distribution_by_trees(
    planar_map: PlanarMap, start: int, target: int
) -> Dict[Tuple[int, ...], float]:
    """
    Exact law of the loop-erased path, as the law of the path joining the endpoints in
    a uniform spanning tree.
    """
    counts: Dict[Tuple[int, ...], int] = {}
    total = 0
    for tree in spanning_trees(planar_map):
        darts = tree_path_darts(planar_map, tree, start, target)
        key = tuple(dart >> 1 for dart in darts)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    return {key: count / total for key, count in counts.items()}


def lerw_distribution_by_harmonic(
    planar_map: PlanarMap,
    start: int,
    target: int,
    *,
    cap: int = 2 * ENUMERATION_MAX_EDGES,
) -> Dict[Tuple[int, ...], float]:
    """Exact law of the loop-erased path, one tip step at a time by harmonic measure."""
    if planar_map.edge_count > cap:
        raise TooLarge(
            f"Refusing to expand paths on {planar_map.edge_count} edges (cap {cap})!"
        )
    if target == start:
        raise ValueError("Loop-erased walk needs distinct endpoints!")
    result: Dict[Tuple[int, ...], float] = {}

    def grow(vertices: List[int], edges: Tuple[int, ...], probability: float):
        if vertices[-1] == target:
            result[edges] = result.get(edges, 0.0) + probability
            return
        law = _tip_law(planar_map, vertices, target)
        for dart, step in zip(law.darts, law.probabilities):
            grow(
                vertices + [planar_map.head(dart)],
                edges + (dart >> 1,),
                probability * float(step),
            )

    grow([start], (), 1.0)
    return result


def ust_edge_marginals(planar_map: PlanarMap) -> Dict[int, float]:
    """Probability that each edge lies in a uniform spanning tree, by enumeration."""
    counts = [0] * planar_map.edge_count
    total = 0
    for tree in spanning_trees(planar_map):
        total += 1
        for edge in tree:
            counts[edge] += 1
    return {edge: count / total for edge, count in enumerate(counts)}
