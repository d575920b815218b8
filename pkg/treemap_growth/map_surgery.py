#!/usr/bin/env python

"""Cutting maps along trees, the inverse gluing, and the laws of cut maps."""

import logging

from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import (
    Dict,
    Hashable,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from .consts import DEFAULT_REJECTION_BUDGET, EXACT_LAW_MAX_CUT, EXACT_LAW_MAX_EDGES
from .dla_engine import DlaCluster, dla_mode_exact_distribution, dla_run
from .errors import (
    EmptyCut,
    InvalidMap,
    NotATree,
    NotInS,
    NotInSPrime,
    RejectionBudgetExceeded,
    TargetAbsorbed,
    TooLarge,
    Unreachable,
)
from .mullin_codec import (
    WalkKind,
    decode,
    enumerate_excursions,
    sample_quadrant_excursion,
)
from .planar_map import (
    BoundaryMap,
    DecoratedMap,
    MapRecord,
    PlanarMap,
    bfs_distance,
    canonical_code,
    format_map,
    tree_path_darts,
    unrooted_code,
)

LOGGER = logging.getLogger(__name__)


class CutResult(NamedTuple):
    """
    A map cut open along a tree.

    Attributes:
        boundary_map: The cut map; its external face is the slit, marks lifted from the cut.
        vertex_lift: Copies of every original vertex (one per corner of the tree at tree vertices).
        dart_lift: For every original dart, its copy bordering the original face.
    """

    boundary_map: BoundaryMap
    vertex_lift: Tuple[Tuple[int, ...], ...]
    dart_lift: Tuple[int, ...]


@dataclass(frozen=True)
class SElement:
    """Decorated map with u, v, w such that the tree path u to w passes through v, v != w."""

    decorated: DecoratedMap
    u: int
    v: int
    w: int


@dataclass(frozen=True)
class SPrimeElement:
    """Wired decorated map with boundary, an interior vertex w' and the boundary vertex v' its tree branch reaches."""

    decorated: DecoratedMap
    w_prime: int
    v_prime: int


def _check_tree(planar_map: PlanarMap, edges: Sequence[int]):
    parents = {}

    def find(vertex: int) -> int:
        parents.setdefault(vertex, vertex)
        while parents[vertex] != vertex:
            parents[vertex] = parents[parents[vertex]]
            vertex = parents[vertex]
        return vertex

    for edge in edges:
        if not 0 <= edge < planar_map.edge_count:
            raise NotATree(f"Unknown edge: {edge}")
        first, second = (find(vertex) for vertex in planar_map.edge_endpoints(edge))
        if first == second:
            raise NotATree(f"Edge {edge} closes a cycle!")
        parents[first] = second
    if len({find(vertex) for vertex in list(parents)}) != 1:
        raise NotATree("Cut edges are not connected!")


def cut_along_tree(
    planar_map: PlanarMap, cut_edges: Iterable[int], *, marks: Sequence[int] = ()
) -> CutResult:
    """
    Slits a map open along a tree of edges.

    Every cut edge becomes two edges: its own identifier keeps the copy on the side of its even
    dart, and the copies on the other side take new identifiers after the existing edges, in order
    of the cut edge. At each tree vertex, the corners between consecutive cut darts become distinct
    vertices. The slit is a new face, a simple cycle of length twice the number of cut edges; all
    other faces are kept. A root dart on a cut edge moves to its copy in the root's original face.

    Args:
        planar_map: The map to cut.
        cut_edges: Edges of a tree.
        marks: Vertices to mark on the result; each must have a single copy.
    """
    cut = sorted(set(cut_edges))
    if not cut:
        raise EmptyCut("Cutting along no edges is not supported!")
    _check_tree(planar_map, cut)

    edge_count = planar_map.edge_count
    extra = {edge: edge_count + index for index, edge in enumerate(cut)}

    def plus(dart: int) -> int:
        if dart & 1 and dart >> 1 in extra:
            return 2 * extra[dart >> 1] + 1
        return dart

    def minus(dart: int) -> int:
        if dart & 1:
            return dart
        return 2 * extra[dart >> 1]

    next_darts = [0] * (2 * (edge_count + len(cut)))
    wedges_of: Dict[int, List[List[int]]] = {}
    for vertex in planar_map.vertices():
        rotation = planar_map.vertex_darts[vertex]
        positions = [index for index, dart in enumerate(rotation) if dart >> 1 in extra]
        if not positions:
            wedges = [rotation]
        else:
            wedges = []
            for index, position in enumerate(positions):
                following = positions[(index + 1) % len(positions)]
                span = (following - position - 1) % len(rotation)
                between = [
                    rotation[(position + 1 + offset) % len(rotation)]
                    for offset in range(span)
                ]
                wedges.append(
                    [minus(rotation[position])] + between + [plus(rotation[following])]
                )
        for wedge in wedges:
            for index, dart in enumerate(wedge):
                next_darts[dart] = wedge[(index + 1) % len(wedge)]
        wedges_of[vertex] = wedges

    root = planar_map.root_dart
    result = PlanarMap(
        next_darts=next_darts, root_dart=None if root is None else plus(root)
    )
    vertex_lift = tuple(
        tuple(result.vertex_of[wedge[0]] for wedge in wedges_of[vertex])
        for vertex in planar_map.vertices()
    )
    lifted_marks = []
    for vertex in marks:
        if len(vertex_lift[vertex]) != 1:
            raise ValueError(
                f"Marked vertex {vertex} has {len(vertex_lift[vertex])} copies!"
            )
        lifted_marks.append(vertex_lift[vertex][0])
    boundary_map = BoundaryMap(
        map=result,
        external_face=result.face_of[minus(2 * cut[0])],
        marked_vertices=tuple(lifted_marks),
    )
    LOGGER.debug(
        "Cut along %d edges: %d edges, boundary %d.",
        len(cut),
        result.edge_count,
        boundary_map.boundary_length,
    )
    return CutResult(
        boundary_map=boundary_map,
        vertex_lift=vertex_lift,
        dart_lift=tuple(plus(dart) for dart in range(planar_map.dart_count)),
    )


def s_path(element: SElement) -> List[int]:
    """
    Darts of the tree path from u to v.

    Raises:
        NotInS: The tuple violates the membership conditions.
    """
    decorated = element.decorated
    if decorated.is_wired:
        raise NotInS("Elements are decorated maps without boundary!")
    planar_map = decorated.map
    vertices = (element.u, element.v, element.w)
    if not all(0 <= vertex < planar_map.vertex_count for vertex in vertices):
        raise NotInS("Unknown vertex!")
    path = tree_path_darts(planar_map, decorated.tree_edges, element.u, element.w)
    visited = [element.u] + [planar_map.head(dart) for dart in path]
    if element.v not in visited[1:-1]:
        raise NotInS(
            f"Vertex {element.v} is not strictly inside the tree path from u to w!"
        )
    return path[: visited.index(element.v)]


def bijection_forward(element: SElement) -> SPrimeElement:
    """Cuts along the tree path from u to v; the wired tree is the boundary plus the rest of the tree."""
    path = s_path(element)
    decorated = element.decorated
    path_edges = {dart >> 1 for dart in path}
    cut = cut_along_tree(decorated.map, path_edges, marks=(element.w, element.v))
    boundary_map = cut.boundary_map
    tree_edges = (decorated.tree_edges - path_edges) | boundary_map.boundary_edges
    w_prime, v_prime = boundary_map.marked_vertices
    return SPrimeElement(
        decorated=DecoratedMap(
            map=boundary_map.map,
            tree_edges=tree_edges,
            external_face=boundary_map.external_face,
        ),
        w_prime=w_prime,
        v_prime=v_prime,
    )


def _branch_end(decorated: DecoratedMap, vertex: int) -> int:
    """Boundary vertex reached from an interior vertex inside the tree without its boundary edges."""
    planar_map = decorated.map
    boundary = {planar_map.tail(dart) for dart in decorated.boundary_darts}
    internal = decorated.tree_edges - decorated.boundary_edges
    seen = {vertex}
    frontier = [vertex]
    while frontier:
        current = frontier.pop()
        for dart in planar_map.vertex_darts[current]:
            if dart >> 1 not in internal:
                continue
            neighbor = planar_map.head(dart)
            if neighbor in boundary:
                return neighbor
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    raise Unreachable(f"No boundary vertex on the branch of {vertex}!")


def check_s_prime(element: SPrimeElement) -> List[int]:
    """
    External face darts starting at v' in face order.

    Raises:
        NotInSPrime: The tuple violates the membership conditions.
    """
    decorated = element.decorated
    if not decorated.is_wired:
        raise NotInSPrime("Elements carry a wired boundary!")
    planar_map = decorated.map
    try:
        boundary_map = BoundaryMap(
            map=planar_map, external_face=decorated.external_face
        )
    except InvalidMap as exception:
        raise NotInSPrime(str(exception)) from exception
    length = boundary_map.boundary_length
    if length % 2 or length < 2:
        raise NotInSPrime(f"Boundary length {length} is not a positive even number!")
    boundary = boundary_map.boundary_vertices
    if element.v_prime not in boundary:
        raise NotInSPrime(f"Vertex {element.v_prime} is not on the boundary!")
    interior = 0 <= element.w_prime < planar_map.vertex_count
    if element.w_prime in boundary or not interior:
        raise NotInSPrime(f"Vertex {element.w_prime} is not interior!")
    try:
        reached = _branch_end(decorated, element.w_prime)
    except Unreachable as exception:
        raise NotInSPrime(str(exception)) from exception
    if reached != element.v_prime:
        raise NotInSPrime(
            f"The tree branch of {element.w_prime} reaches {reached}, "
            f"not {element.v_prime}!"
        )
    if planar_map.root_dart in boundary_map.boundary_darts:
        raise NotInSPrime("Root dart lies on the external face!")

    darts = boundary_map.boundary_darts
    start = next(
        index
        for index, dart in enumerate(darts)
        if planar_map.tail(dart) == element.v_prime
    )
    return list(darts[start:] + darts[:start])


def bijection_inverse(element: SPrimeElement) -> SElement:
    """
    Glues the boundary shut: boundary vertices at equal distance from v' are identified, so the
    boundary folds onto a tree path from v to the vertex u opposite v'.
    """
    face = check_s_prime(element)
    decorated = element.decorated
    planar_map = decorated.map
    length = len(face)
    half = length // 2
    partner = {face[index] ^ 1: face[length - 1 - index] for index in range(length)}
    boundary_edges = decorated.boundary_edges

    new_dart: Dict[int, int] = {}
    edge = 0
    for old in range(planar_map.edge_count):
        if old not in boundary_edges:
            new_dart[2 * old], new_dart[2 * old + 1] = 2 * edge, 2 * edge + 1
            edge += 1
    glued_edges = []
    for index in range(half):
        new_dart[face[index]] = 2 * edge
        new_dart[face[length - 1 - index]] = 2 * edge + 1
        glued_edges.append(edge)
        edge += 1

    next_darts = [0] * (2 * edge)
    for old, dart in new_dart.items():
        successor = planar_map.next_darts[old]
        next_darts[dart] = new_dart[partner.get(successor, successor)]
    root = planar_map.root_dart
    glued = PlanarMap(
        next_darts=next_darts, root_dart=new_dart[partner.get(root, root)]
    )

    tree_edges = {
        new_dart[2 * old] >> 1 for old in decorated.tree_edges - boundary_edges
    }
    tree_edges.update(glued_edges)
    w_dart = planar_map.vertex_darts[element.w_prime][0]
    return SElement(
        decorated=DecoratedMap(map=glued, tree_edges=frozenset(tree_edges)),
        u=glued.vertex_of[new_dart[face[half]]],
        v=glued.vertex_of[new_dart[face[0]]],
        w=glued.vertex_of[new_dart[w_dart]],
    )


def s_code(element: SElement) -> bytes:
    # pylint: disable=missing-function-docstring
    return canonical_code(element.decorated, marks=(element.u, element.v, element.w))


def s_prime_code(element: SPrimeElement) -> bytes:
    # pylint: disable=missing-function-docstring
    return canonical_code(element.decorated, marks=(element.w_prime, element.v_prime))


def enumerate_s(edges: int, cut: int) -> Iterator[SElement]:
    """All elements with rooted decorated maps of `edges` edges and tree paths u to v of `cut` edges."""
    for walk in enumerate_excursions(edges):
        decorated = decode(walk)
        planar_map = decorated.map
        for u, w in product(planar_map.vertices(), repeat=2):
            path = tree_path_darts(planar_map, decorated.tree_edges, u, w)
            if len(path) > cut:
                yield SElement(
                    decorated=decorated, u=u, v=planar_map.head(path[cut - 1]), w=w
                )


def enumerate_s_prime(edges: int, cut: int) -> Iterator[SPrimeElement]:
    """
    All elements with `edges + cut` edges and boundary length 2 * cut, one per decoded map and w'.

    Maps rooted on the external face are rerooted at the twin of their root dart.
    """
    walks = enumerate_excursions(
        edges + cut, WalkKind.BOUNDARY_EXCURSION, boundary_length=2 * cut
    )
    for walk in walks:
        decorated = decode(walk)
        planar_map = decorated.map
        if planar_map.root_dart in decorated.boundary_darts:
            planar_map = planar_map.with_root(planar_map.root_dart ^ 1)
            decorated = DecoratedMap(
                map=planar_map,
                tree_edges=decorated.tree_edges,
                external_face=decorated.external_face,
            )
        for w_prime in decorated.boundary_view().interior_vertices():
            yield SPrimeElement(
                decorated=decorated,
                w_prime=w_prime,
                v_prime=_branch_end(decorated, w_prime),
            )


def count_s(edges: int, cut: int) -> int:
    """Number of elements up to isomorphism (the root forgotten)."""
    return len(
        {
            unrooted_code(
                element.decorated.map,
                tree_edges=element.decorated.tree_edges,
                marks=(element.u, element.v, element.w),
            )
            for element in enumerate_s(edges, cut)
        }
    )


def count_s_prime(edges: int, cut: int) -> int:
    """Number of elements up to isomorphism (the root forgotten)."""
    return len(
        {
            unrooted_code(
                element.decorated.map,
                tree_edges=element.decorated.tree_edges,
                marks=(element.w_prime, element.v_prime),
                face_marks=(element.decorated.external_face,),
            )
            for element in enumerate_s_prime(edges, cut)
        }
    )


def cut_signature(boundary_map: BoundaryMap) -> Tuple[int, int, int]:
    """
    Coarse isomorphism invariant of a cut map with marks (w', tip).

    Distance from w' to the boundary (capped at 4), degree of the tip (capped at 6) and number of
    vertices adjacent to the boundary but not on it (capped at 8).
    """
    planar_map = boundary_map.map
    w_prime, tip = boundary_map.marked_vertices
    boundary = set(boundary_map.boundary_vertices)
    depth = bfs_distance(planar_map, [w_prime], boundary)
    adjacent = {
        neighbor
        for vertex in boundary
        for neighbor in planar_map.neighbors(vertex)
        if neighbor not in boundary
    }
    return min(depth, 4), min(planar_map.degree(tip), 6), min(len(adjacent), 8)


def _check_exact(edges: int, cut: int):
    if cut < 1:
        raise EmptyCut("Cut laws need at least one edge!")
    if edges > EXACT_LAW_MAX_EDGES or cut > EXACT_LAW_MAX_CUT:
        raise TooLarge(
            f"Exact laws limited to {EXACT_LAW_MAX_EDGES} edges "
            f"and cuts of {EXACT_LAW_MAX_CUT}!"
        )


def _normalized(weights: Dict[Hashable, float]) -> Dict[Hashable, float]:
    total = sum(weights.values())
    return {key: value / total for key, value in weights.items()}


def _cut_key(planar_map: PlanarMap, edges: Iterable[int], w: int, tip: int) -> bytes:
    cut = cut_along_tree(planar_map, edges, marks=(w, tip))
    return canonical_code(cut.boundary_map)


def _sample_decorated(edges: int, rng: np.random.Generator) -> DecoratedMap:
    return decode(sample_quadrant_excursion(edges, rng))


def _lerw_exact(edges: int, cut: int) -> Dict[Hashable, float]:
    weights: Dict[Hashable, float] = Counter()
    for walk in enumerate_excursions(edges):
        decorated = decode(walk)
        planar_map = decorated.map
        weight = 1.0 / planar_map.vertex_count**2
        for u, w in product(planar_map.vertices(), repeat=2):
            path = tree_path_darts(planar_map, decorated.tree_edges, u, w)
            if len(path) >= cut:
                cut_edges = {dart >> 1 for dart in path[:cut]}
                tip = planar_map.head(path[cut - 1])
                weights[_cut_key(planar_map, cut_edges, w, tip)] += weight
    return _normalized(weights)


def _dla_exact(edges: int, cut: int) -> Dict[Hashable, float]:
    weights: Dict[Hashable, float] = Counter()
    laws: Dict[Tuple[PlanarMap, int, int], Dict[bytes, float]] = {}
    for walk in enumerate_excursions(edges):
        planar_map = decode(walk).map
        weight = 1.0 / planar_map.vertex_count**2
        for u, w in product(planar_map.vertices(), repeat=2):
            if u == w:
                continue
            law = laws.get((planar_map, u, w))
            if law is None:
                law = Counter()
                outcomes = dla_mode_exact_distribution(
                    planar_map,
                    u,
                    w,
                    cut,
                    key=lambda cluster, w=w: _tip_code(planar_map, cluster, w),
                )
                for probability, cluster in outcomes.outcomes.values():
                    tip = cluster.vertices[-1]
                    law[_cut_key(planar_map, cluster.edge_set, w, tip)] += probability
                laws[(planar_map, u, w)] = law
            for key, probability in law.items():
                weights[key] += weight * probability
    return _normalized(weights)


def _tip_code(planar_map: PlanarMap, cluster: DlaCluster, target: int) -> bytes:
    return canonical_code(
        planar_map,
        tree_edges=cluster.edge_set,
        marks=(cluster.seed, target, cluster.vertices[-1]),
    )


def _monte_carlo(
    edges: int,
    cut: int,
    rng: np.random.Generator,
    samples: int,
    budget: int,
    *,
    use_dla: bool,
) -> Dict[Hashable, float]:
    counts: Dict[Hashable, float] = Counter()
    attempts = 0
    while sum(counts.values()) < samples:
        attempts += 1
        if attempts > budget:
            raise RejectionBudgetExceeded(
                f"Accepted {sum(counts.values())} of {samples} samples "
                f"in {budget} attempts!"
            )
        decorated = _sample_decorated(edges, rng)
        planar_map = decorated.map
        u, w = (int(vertex) for vertex in rng.integers(planar_map.vertex_count, size=2))
        if use_dla:
            if u == w:
                continue
            try:
                cluster = dla_run(planar_map, u, w, cut, rng)
            except TargetAbsorbed:
                continue
            cut_edges, tip = cluster.edge_set, cluster.vertices[-1]
        else:
            path = tree_path_darts(planar_map, decorated.tree_edges, u, w)
            if len(path) < cut:
                continue
            cut_edges = {dart >> 1 for dart in path[:cut]}
            tip = planar_map.head(path[cut - 1])
        result = cut_along_tree(planar_map, cut_edges, marks=(w, tip))
        counts[cut_signature(result.boundary_map)] += 1
    LOGGER.debug("Accepted %d samples in %d attempts.", samples, attempts)
    return dict(counts)


def cut_distribution_lerw(
    edges: int,
    cut: int,
    *,
    mode: str = "exact",
    rng: Optional[np.random.Generator] = None,
    samples: int = 1000,
    budget: int = DEFAULT_REJECTION_BUDGET,
) -> Dict[Hashable, float]:
    """
    Law of the map cut along the first `cut` edges of the tree path from u to w, marked with w and
    the tip, for a uniform decorated map and independent uniform u, w with tree distance >= cut.

    Args:
        edges: Size of the decorated maps.
        cut: Number of path edges cut.
        mode: "exact" (probabilities keyed by canonical code) or "monte_carlo" (sample counts keyed
              by cut_signature()).
        rng: Random source for monte_carlo.
        samples: Accepted samples for monte_carlo.
        budget: Largest number of attempts for monte_carlo.
    """
    match mode:
        case "exact":
            _check_exact(edges, cut)
            return _lerw_exact(edges, cut)
        case "monte_carlo":
            rng = rng or np.random.default_rng()
            return _monte_carlo(edges, cut, rng, samples, budget, use_dla=False)
        case _:
            raise ValueError(f"Unknown mode: {mode}")


def cut_distribution_dla(
    edges: int,
    cut: int,
    *,
    mode: str = "exact",
    rng: Optional[np.random.Generator] = None,
    samples: int = 1000,
    budget: int = DEFAULT_REJECTION_BUDGET,
) -> Dict[Hashable, float]:
    """
    Law of the map cut along the cluster of `cut` DLA steps from u targeted at w, marked with w and
    the last vertex added, for a uniform decorated map and independent uniform u != w; runs that
    absorb w before the last step are discarded. Arguments as for cut_distribution_lerw().
    """
    match mode:
        case "exact":
            _check_exact(edges, cut)
            return _dla_exact(edges, cut)
        case "monte_carlo":
            rng = rng or np.random.default_rng()
            return _monte_carlo(edges, cut, rng, samples, budget, use_dla=True)
        case _:
            raise ValueError(f"Unknown mode: {mode}")


def format_s_element(element: SElement) -> str:
    """Text form: the decorated map with MARK u v w."""
    decorated = element.decorated
    return format_map(
        decorated.map,
        tree_edges=decorated.tree_edges,
        marks=(element.u, element.v, element.w),
    )


def format_s_prime_element(element: SPrimeElement) -> str:
    """Text form: the wired decorated map with its external face and MARK w' v'."""
    decorated = element.decorated
    return format_map(
        decorated.map,
        tree_edges=decorated.tree_edges,
        external_face=decorated.external_face,
        marks=(element.w_prime, element.v_prime),
    )


def s_element_from_record(record: MapRecord) -> SElement:
    # pylint: disable=missing-function-docstring
    if record.tree_edges is None or len(record.marks) != 3:
        raise NotInS("Record needs a tree and three marks!")
    u, v, w = record.marks
    decorated = DecoratedMap(map=record.map, tree_edges=record.tree_edges)
    return SElement(decorated=decorated, u=u, v=v, w=w)


def s_prime_element_from_record(record: MapRecord) -> SPrimeElement:
    # pylint: disable=missing-function-docstring
    incomplete = record.tree_edges is None or record.external_face is None
    if incomplete or len(record.marks) != 2:
        raise NotInSPrime("Record needs a tree, an external face and two marks!")
    w_prime, v_prime = record.marks
    return SPrimeElement(
        decorated=DecoratedMap(
            map=record.map,
            tree_edges=record.tree_edges,
            external_face=record.external_face,
        ),
        w_prime=w_prime,
        v_prime=v_prime,
    )

