#!/usr/bin/env python

"""Rooted planar maps stored as dart rotation systems."""

import logging
import struct

from collections import deque
from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Protocol,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .errors import (
    BadInvolution,
    Disconnected,
    EmptyMap,
    InvalidMap,
    NonPlanar,
    NotATree,
    Unreachable,
)

__all__ = [
    "BoundaryMap",
    "DecoratedMap",
    "MapRecord",
    "PlanarMap",
    "bfs_distance",
    "bfs_distances",
    "bfs_layers",
    "build_from_permutations",
    "canonical_code",
    "diameter",
    "dual",
    "dual_tree_edges",
    "eccentricity",
    "edge_distance",
    "edge_vertices",
    "format_map",
    "parse_map",
    "radial_quadrangulation",
    "relabel",
    "set_diameter",
    "tour_successor",
    "tree_path_darts",
    "triangle_adjacency",
    "unrooted_code",
    "vertex_map",
]

LOGGER = logging.getLogger(__name__)


class Graph(Protocol):
    # pylint: disable=missing-class-docstring
    def neighbors(self, vertex: int) -> Sequence[int]: ...

    def vertices(self) -> Iterable[int]: ...


def _orbits(permutation: Sequence[int]) -> Tuple[List[int], List[Tuple[int, ...]]]:
    """Labels the cycles of a permutation in order of their smallest element."""
    labels = [-1] * len(permutation)
    orbits = []
    for start in range(len(permutation)):
        if labels[start] >= 0:
            continue
        orbit = []
        dart = start
        while labels[dart] < 0:
            labels[dart] = len(orbits)
            orbit.append(dart)
            dart = permutation[dart]
        orbits.append(tuple(orbit))
    return labels, orbits


class PlanarMap:
    # pylint: disable=too-many-instance-attributes
    """
    Rooted genus 0 map.

    Dart d and d ^ 1 are the two halves of edge d >> 1 and next_darts[d] is the dart following d
    counterclockwise around its vertex. The root vertex is the terminal vertex of the root dart.
    Instances are immutable; constructions return new maps.
    """

    __slots__ = (
        "_adjacency",
        "dart_count",
        "edge_count",
        "face_darts",
        "face_of",
        "next_darts",
        "root_dart",
        "vertex_darts",
        "vertex_of",
    )

    def __init__(self, *, next_darts: Sequence[int], root_dart: Optional[int]):
        next_darts = tuple(int(dart) for dart in next_darts)
        dart_count = len(next_darts)
        if dart_count % 2:
            raise BadInvolution(f"Odd number of darts: {dart_count}")

        seen = bytearray(dart_count)
        for dart in next_darts:
            if not 0 <= dart < dart_count or seen[dart]:
                raise InvalidMap("Rotation is not a permutation of the darts!")
            seen[dart] = 1

        if dart_count == 0:
            if root_dart is not None:
                raise InvalidMap("The vertex map has no root dart!")
        elif root_dart is None or not 0 <= root_dart < dart_count:
            raise InvalidMap(f"Invalid root dart: {root_dart}")

        self.next_darts = next_darts
        self.dart_count = dart_count
        self.edge_count = dart_count // 2
        self.root_dart = root_dart

        vertex_of, vertex_darts = _orbits(next_darts)
        face_of, face_darts = _orbits(
            [next_darts[dart ^ 1] for dart in range(dart_count)]
        )
        if dart_count == 0:
            vertex_darts, face_darts = [()], [()]
        self.vertex_of = tuple(vertex_of)
        self.vertex_darts = tuple(vertex_darts)
        self.face_of = tuple(face_of)
        self.face_darts = tuple(face_darts)
        self._adjacency = None

        self._check_connected()
        euler = self.vertex_count - self.edge_count + self.face_count
        if euler != 2:
            raise NonPlanar(f"Euler characteristic is {euler}, not 2!")

    def _check_connected(self):
        visited = bytearray(self.vertex_count)
        visited[0] = 1
        queue = deque([0])
        reached = 1
        while queue:
            for neighbor in self.neighbors(queue.popleft()):
                if not visited[neighbor]:
                    visited[neighbor] = 1
                    reached += 1
                    queue.append(neighbor)
        if reached != self.vertex_count:
            raise Disconnected(f"Reached {reached} of {self.vertex_count} vertices!")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanarMap):
            return NotImplemented
        return self.next_darts == other.next_darts and self.root_dart == other.root_dart

    def __hash__(self) -> int:
        return hash((self.next_darts, self.root_dart))

    def __repr__(self) -> str:
        return (
            f"PlanarMap(vertices={self.vertex_count}, edges={self.edge_count}, "
            f"faces={self.face_count}, root={self.root_dart})"
        )

    @property
    def vertex_count(self) -> int:
        # pylint: disable=missing-function-docstring
        return len(self.vertex_darts)

    @property
    def face_count(self) -> int:
        # pylint: disable=missing-function-docstring
        return len(self.face_darts)

    @property
    def root_vertex(self) -> int:
        """Terminal vertex of the root dart (vertex 0 on the vertex map)."""
        if self.root_dart is None:
            return 0
        return self.head(self.root_dart)

    @staticmethod
    def twin(dart: int) -> int:
        # pylint: disable=missing-function-docstring
        return dart ^ 1

    def tail(self, dart: int) -> int:
        # pylint: disable=missing-function-docstring
        return self.vertex_of[dart]

    def head(self, dart: int) -> int:
        # pylint: disable=missing-function-docstring
        return self.vertex_of[dart ^ 1]

    def edge_endpoints(self, edge: int) -> Tuple[int, int]:
        # pylint: disable=missing-function-docstring
        return self.vertex_of[2 * edge], self.vertex_of[2 * edge + 1]

    def degree(self, vertex: int) -> int:
        """Number of darts at a vertex; a self-loop counts twice."""
        return len(self.vertex_darts[vertex])

    def neighbors(self, vertex: int) -> Tuple[int, ...]:
        """Heads of the darts at a vertex, in rotation order and with multiplicity."""
        if self._adjacency is None:
            vertex_of = self.vertex_of
            self._adjacency = tuple(
                tuple(vertex_of[dart ^ 1] for dart in darts)
                for darts in self.vertex_darts
            )
        if not self.dart_count:
            return ()
        return self._adjacency[vertex]

    def vertices(self) -> range:
        # pylint: disable=missing-function-docstring
        return range(self.vertex_count)

    def previous_dart(self, dart: int) -> int:
        """Dart preceding the given dart counterclockwise around its vertex."""
        darts = self.vertex_darts[self.vertex_of[dart]]
        return darts[darts.index(dart) - 1]

    def with_root(self, root_dart: Optional[int]) -> "PlanarMap":
        """Same rotation system, different root."""
        return PlanarMap(next_darts=self.next_darts, root_dart=root_dart)

    def is_bipartite(self) -> bool:
        # pylint: disable=missing-function-docstring
        color = [-1] * self.vertex_count
        color[0] = 0
        queue = deque([0])
        while queue:
            vertex = queue.popleft()
            for neighbor in self.neighbors(vertex):
                if color[neighbor] < 0:
                    color[neighbor] = 1 - color[vertex]
                    queue.append(neighbor)
                elif color[neighbor] == color[vertex]:
                    return False
        return True


@dataclass(frozen=True)
class DecoratedMap:
    """
    Planar map with a spanning tree.

    When external_face is set the tree is wired: it contains every edge of the external face and
    is a spanning tree once the boundary vertices are identified.
    """

    map: PlanarMap
    tree_edges: FrozenSet[int]
    external_face: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "tree_edges", frozenset(self.tree_edges))
        planar_map = self.map
        for edge in self.tree_edges:
            if not 0 <= edge < planar_map.edge_count:
                raise NotATree(f"Unknown edge: {edge}")

        parents = list(range(planar_map.vertex_count))

        def find(vertex: int) -> int:
            while parents[vertex] != vertex:
                parents[vertex] = parents[parents[vertex]]
                vertex = parents[vertex]
            return vertex

        components = planar_map.vertex_count
        if self.external_face is not None:
            if not self.boundary_edges <= self.tree_edges:
                raise NotATree("Wired tree must contain the boundary!")
            boundary = sorted({planar_map.tail(dart) for dart in self.boundary_darts})
            for vertex in boundary[1:]:
                parents[find(vertex)] = find(boundary[0])
            components -= len(boundary) - 1
            internal = self.tree_edges - self.boundary_edges
        else:
            internal = self.tree_edges

        for edge in internal:
            first, second = (find(vertex) for vertex in planar_map.edge_endpoints(edge))
            if first == second:
                raise NotATree(f"Edge {edge} closes a cycle!")
            parents[first] = second
            components -= 1
        if components != 1:
            raise NotATree(f"Tree spans {components} components!")

    @property
    def is_wired(self) -> bool:
        # pylint: disable=missing-function-docstring
        return self.external_face is not None

    @property
    def boundary_darts(self) -> Tuple[int, ...]:
        """Darts of the external face in face order (empty without one)."""
        if self.external_face is None:
            return ()
        return self.map.face_darts[self.external_face]

    @property
    def boundary_edges(self) -> FrozenSet[int]:
        # pylint: disable=missing-function-docstring
        return frozenset(dart >> 1 for dart in self.boundary_darts)

    def boundary_view(self) -> "BoundaryMap":
        """The map with its external face, when it has one."""
        if self.external_face is None:
            raise ValueError("Decorated map has no external face!")
        return BoundaryMap(map=self.map, external_face=self.external_face)


@dataclass(frozen=True)
class BoundaryMap:
    """Planar map with a distinguished external face and optional marked vertices."""

    map: PlanarMap
    external_face: int
    marked_vertices: Tuple[int, ...] = ()
    require_simple: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "marked_vertices", tuple(self.marked_vertices))
        if not 0 <= self.external_face < self.map.face_count or not self.map.dart_count:
            raise InvalidMap(f"Invalid external face: {self.external_face}")
        for vertex in self.marked_vertices:
            if not 0 <= vertex < self.map.vertex_count:
                raise InvalidMap(f"Invalid marked vertex: {vertex}")
        if self.require_simple and not self.is_simple():
            raise InvalidMap("Boundary of the external face is not a simple cycle!")

    @property
    def boundary_darts(self) -> Tuple[int, ...]:
        # pylint: disable=missing-function-docstring
        return self.map.face_darts[self.external_face]

    @property
    def boundary_vertices(self) -> Tuple[int, ...]:
        # pylint: disable=missing-function-docstring
        return tuple(self.map.tail(dart) for dart in self.boundary_darts)

    @property
    def boundary_edges(self) -> FrozenSet[int]:
        # pylint: disable=missing-function-docstring
        return frozenset(dart >> 1 for dart in self.boundary_darts)

    @property
    def boundary_length(self) -> int:
        # pylint: disable=missing-function-docstring
        return len(self.boundary_darts)

    def is_simple(self) -> bool:
        """True when the boundary walk visits no vertex twice."""
        vertices = self.boundary_vertices
        return len(set(vertices)) == len(vertices)

    def interior_vertices(self) -> List[int]:
        # pylint: disable=missing-function-docstring
        boundary = set(self.boundary_vertices)
        return [vertex for vertex in self.map.vertices() if vertex not in boundary]


def vertex_map() -> PlanarMap:
    """The one-vertex map without edges."""
    return PlanarMap(next_darts=(), root_dart=None)


def _pair_relabeling(twin_darts: Sequence[int]) -> List[int]:
    """Renumbers darts so that twins become d and d ^ 1; edges ordered by their smallest dart."""
    dart_count = len(twin_darts)
    relabeled = [-1] * dart_count
    edge = 0
    for dart in range(dart_count):
        other = twin_darts[dart]
        if not 0 <= other < dart_count or other == dart or twin_darts[other] != dart:
            raise BadInvolution(
                f"Twin is not a fixed-point-free involution at dart {dart}!"
            )
        if relabeled[dart] >= 0:
            continue
        relabeled[dart] = 2 * edge
        relabeled[other] = 2 * edge + 1
        edge += 1
    return relabeled


def build_from_permutations(
    *, next_darts: Sequence[int], twin_darts: Sequence[int], root_dart: Optional[int]
) -> PlanarMap:
    """
    Builds a map from an arbitrary rotation and twin involution.

    Args:
        next_darts: Counterclockwise successor of every dart around its vertex.
        twin_darts: Fixed-point-free involution pairing the darts of each edge.
        root_dart: Root dart (None only without darts).

    Returns:
        The map with darts renumbered so that twin(d) = d ^ 1.
    """
    if len(next_darts) != len(twin_darts):
        raise InvalidMap("Rotation and twin differ in length!")
    relabeled = _pair_relabeling(twin_darts)
    next_new = [0] * len(next_darts)
    for dart, successor in enumerate(next_darts):
        next_new[relabeled[dart]] = relabeled[successor]
    root = None if root_dart is None else relabeled[root_dart]
    return PlanarMap(next_darts=next_new, root_dart=root)


def relabel(
    planar_map: PlanarMap, *, edge_order: Sequence[int], flips: Sequence[bool]
) -> Tuple[PlanarMap, List[int]]:
    """
    Renames edges and swaps the darts of selected edges.

    Args:
        planar_map: The map to relabel.
        edge_order: New position of every edge.
        flips: Whether the two darts of an edge trade identifiers.

    Returns:
        The relabeled map and the old-to-new dart correspondence.
    """
    relabeled = [
        2 * edge_order[dart >> 1] + ((dart & 1) ^ int(flips[dart >> 1]))
        for dart in range(planar_map.dart_count)
    ]
    next_new = [0] * planar_map.dart_count
    for dart, successor in enumerate(planar_map.next_darts):
        next_new[relabeled[dart]] = relabeled[successor]
    root = None if planar_map.root_dart is None else relabeled[planar_map.root_dart]
    return PlanarMap(next_darts=next_new, root_dart=root), relabeled


def dual(planar_map: PlanarMap) -> PlanarMap:
    """
    Dual map on the same darts: the rotation around a face follows next after twin.

    The root dart is kept, so dual(dual(m)) == m.
    """
    next_darts = planar_map.next_darts
    return PlanarMap(
        next_darts=[next_darts[dart ^ 1] for dart in range(planar_map.dart_count)],
        root_dart=planar_map.root_dart,
    )


def dual_tree_edges(decorated: DecoratedMap) -> FrozenSet[int]:
    """Edges of the dual spanning tree: duals of the edges outside the primal tree."""
    return frozenset(range(decorated.map.edge_count)) - decorated.tree_edges


def radial_quadrangulation(planar_map: Union[PlanarMap, DecoratedMap]) -> PlanarMap:
    """
    Builds the radial quadrangulation on primal and dual vertices.

    Corner d (between d and next(d) at tail(d)) yields the edge with darts 2d at the primal vertex
    and 2d + 1 at the dual vertex of the face containing the corner. Even darts sit at primal
    vertices, so the result is bipartite. Faces are traversed clockwise by next after twin, so the
    corner following d counterclockwise around its face vertex is previous(d ^ 1); the face of
    primal edge d >> 1 is then bounded by the corners d, previous(d ^ 1), d ^ 1 and previous(d).
    The root is the first corner edge clockwise from the root dart at its initial vertex.
    """
    if isinstance(planar_map, DecoratedMap):
        planar_map = planar_map.map
    if not planar_map.dart_count:
        raise EmptyMap("The vertex map has no corners!")

    next_darts = planar_map.next_darts
    previous = [0] * planar_map.dart_count
    for dart, successor in enumerate(next_darts):
        previous[successor] = dart
    next_quad = [0] * (2 * planar_map.dart_count)
    for dart in range(planar_map.dart_count):
        next_quad[2 * dart] = 2 * next_darts[dart]
        next_quad[2 * dart + 1] = 2 * previous[dart ^ 1] + 1
    root = 2 * previous[planar_map.root_dart]
    quadrangulation = PlanarMap(next_darts=next_quad, root_dart=root)
    LOGGER.debug(
        "Radial quadrangulation: %d vertices, %d faces.",
        quadrangulation.vertex_count,
        quadrangulation.face_count,
    )
    return quadrangulation


def tour_successor(decorated: DecoratedMap, dart: int) -> int:
    """Dart processed after the given one by the contour tour between the tree and its dual."""
    next_darts = decorated.map.next_darts
    if dart >> 1 in decorated.tree_edges:
        return next_darts[dart ^ 1]
    return next_darts[dart]


def triangle_adjacency(decorated: DecoratedMap) -> Set[Tuple[int, int]]:
    """
    Adjacency of the triangles of the radial quadrangulation split by T and T*.

    Triangles are indexed by darts. Two triangles share a quadrangulation edge when they are
    consecutive along the contour tour, and share a diagonal when their darts are twins.
    """
    pairs = set()
    for dart in range(decorated.map.dart_count):
        for other in (tour_successor(decorated, dart), dart ^ 1):
            if other != dart:
                pairs.add((min(dart, other), max(dart, other)))
    return pairs


def bfs_distances(
    graph: Graph,
    sources: Iterable[int],
    *,
    targets: Optional[Iterable[int]] = None,
    max_distance: Optional[int] = None,
) -> Dict[int, int]:
    """
    Multi-source breadth-first search.

    Args:
        graph: Any graph exposing neighbors().
        sources: Start vertices (distance 0).
        targets: Stop as soon as all of these are reached.
        max_distance: Do not expand beyond this distance.

    Returns:
        Distances of the visited vertices.
    """
    distances = {vertex: 0 for vertex in sources}
    if not distances:
        raise ValueError("Empty source set!")
    pending = None
    if targets is not None:
        pending = {vertex for vertex in targets if vertex not in distances}
        if not pending:
            return distances
    queue = deque(distances)
    neighbors = graph.neighbors
    while queue:
        vertex = queue.popleft()
        distance = distances[vertex] + 1
        if max_distance is not None and distance > max_distance:
            break
        for neighbor in neighbors(vertex):
            if neighbor in distances:
                continue
            distances[neighbor] = distance
            queue.append(neighbor)
            if pending is not None:
                pending.discard(neighbor)
                if not pending:
                    return distances
    return distances


def bfs_layers(graph: Graph, center: int, max_distance: int) -> List[int]:
    """Sizes of the spheres of radius 0..max_distance around a vertex."""
    layers = [0] * (max_distance + 1)
    for distance in bfs_distances(graph, [center], max_distance=max_distance).values():
        layers[distance] += 1
    return layers


def bfs_distance(graph: Graph, sources: Iterable[int], targets: Iterable[int]) -> int:
    """Graph distance between two nonempty vertex sets."""
    targets = set(targets)
    if not targets:
        raise ValueError("Empty target set!")
    distances = bfs_distances(graph, sources, targets=targets)
    reached = [distances[vertex] for vertex in targets if vertex in distances]
    if not reached:
        raise Unreachable("Target set is not reachable!")
    return min(reached)


def edge_vertices(planar_map: PlanarMap, edges: Iterable[int]) -> Set[int]:
    """Endpoints of a set of edges."""
    vertices = set()
    for edge in edges:
        vertices.update(planar_map.edge_endpoints(edge))
    return vertices


def edge_distance(
    planar_map: PlanarMap, first: Iterable[int], second: Iterable[int]
) -> int:
    """Distance between edge sets: the minimum over their endpoints."""
    return bfs_distance(
        planar_map, edge_vertices(planar_map, first), edge_vertices(planar_map, second)
    )


def eccentricity(
    graph: Graph, vertex: int, *, within: Optional[Set[int]] = None
) -> int:
    """Largest distance from a vertex to the graph (or to a vertex subset)."""
    distances = bfs_distances(graph, [vertex], targets=within)
    if within is None:
        return max(distances.values())
    if any(other not in distances for other in within):
        raise Unreachable(f"Vertex subset is not reachable from {vertex}!")
    return max(distances[other] for other in within)


def _farthest(distances: Dict[int, int], within: Set[int]) -> int:
    return min(within, key=lambda vertex: (-distances[vertex], vertex))


def set_diameter(graph: Graph, vertices: Iterable[int]) -> int:
    """
    Largest graph distance between two vertices of a subset, measured in the whole graph.

    Exact; BFS work is pruned with the iFUB scheme (fringe levels around a double-sweep centre).
    """
    within = set(vertices)
    if not within:
        raise ValueError("Empty vertex set!")
    if len(within) == 1:
        return 0

    start = min(within)
    distances = bfs_distances(graph, [start], targets=within)
    if any(vertex not in distances for vertex in within):
        raise Unreachable("Vertex subset is not connected!")
    first = _farthest(distances, within)
    from_first = bfs_distances(graph, [first])
    second = _farthest(from_first, within)
    sweep = from_first[second]
    from_second = bfs_distances(graph, [second])
    lower = max(from_second[vertex] for vertex in within)

    centre = min(
        vertex
        for vertex, distance in from_first.items()
        if distance == sweep // 2 and from_second.get(vertex) == sweep - sweep // 2
    )
    from_centre = bfs_distances(graph, [centre])
    levels: Dict[int, List[int]] = {}
    for vertex in within:
        levels.setdefault(from_centre[vertex], []).append(vertex)
    LOGGER.debug("Diameter sweep: lower bound %d, centre %d.", lower, centre)

    for level in range(max(levels), 0, -1):
        if lower >= 2 * level:
            break
        for vertex in levels.get(level, ()):
            lower = max(lower, eccentricity(graph, vertex, within=within))
        if lower >= 2 * (level - 1):
            break
    return lower


def diameter(graph: Graph) -> int:
    """Largest distance between two vertices."""
    return set_diameter(graph, graph.vertices())


def tree_path_darts(
    planar_map: PlanarMap, tree_edges: Iterable[int], source: int, target: int
) -> List[int]:
    """
    Darts of the path between two vertices inside an edge set containing no cycle.

    Returns:
        Darts from source to target, each starting where the previous one ends.
    """
    allowed = set(tree_edges)
    parent_dart = {source: None}
    queue = deque([source])
    while queue and target not in parent_dart:
        vertex = queue.popleft()
        for dart in planar_map.vertex_darts[vertex]:
            if dart >> 1 not in allowed:
                continue
            neighbor = planar_map.head(dart)
            if neighbor not in parent_dart:
                parent_dart[neighbor] = dart
                queue.append(neighbor)
    if target not in parent_dart:
        raise Unreachable(f"Vertex {target} not reachable from {source} in the tree!")
    darts = []
    vertex = target
    while parent_dart[vertex] is not None:
        dart = parent_dart[vertex]
        darts.append(dart)
        vertex = planar_map.tail(dart)
    darts.reverse()
    return darts


def _rooted_code(
    planar_map: PlanarMap,
    root: Optional[int],
    tree_edges: Optional[FrozenSet[int]],
    marks: Sequence[int],
    face_marks: Sequence[int],
) -> bytes:
    values = [planar_map.dart_count]
    if root is None:
        values.append(0 if tree_edges is None else 1)
        values.append(len(marks))
        values.extend(0 for _ in marks)
        values.append(len(face_marks))
        values.extend(0 for _ in face_marks)
        return struct.pack(f">{len(values)}I", *values)

    next_darts = planar_map.next_darts
    labels = [-1] * planar_map.dart_count
    labels[root] = 0
    order = [root]
    index = 0
    while index < len(order):
        dart = order[index]
        index += 1
        for other in (next_darts[dart], dart ^ 1):
            if labels[other] < 0:
                labels[other] = len(order)
                order.append(other)

    for dart in order:
        values.append(labels[next_darts[dart]])
        values.append(labels[dart ^ 1])
    if tree_edges is None:
        values.append(0)
    else:
        values.append(1)
        values.extend(int(dart >> 1 in tree_edges) for dart in order)
    values.append(len(marks))
    values.extend(
        min(labels[dart] for dart in planar_map.vertex_darts[vertex])
        for vertex in marks
    )
    values.append(len(face_marks))
    values.extend(
        min(labels[dart] for dart in planar_map.face_darts[face])
        for face in face_marks
    )
    return struct.pack(f">{len(values)}I", *values)


def canonical_code(
    obj: Union[PlanarMap, DecoratedMap, BoundaryMap],
    *,
    tree_edges: Optional[Iterable[int]] = None,
    marks: Sequence[int] = (),
    root: Optional[int] = None,
) -> bytes:
    """
    Canonical byte string of a rooted map with optional decorations.

    Darts are relabeled in breadth-first order from the root (visiting next then twin), so two
    objects share a code exactly when a root-preserving isomorphism maps one onto the other,
    decorations included. Boundary maps are coded up to the choice of root on the external face.

    Args:
        obj: The map to encode.
        tree_edges: Marked edge set (the tree of a decorated map when omitted).
        marks: Additional marked vertices, in order.
        root: Root dart overriding the map's own.

    Returns:
        The code; byte order is a total order on isomorphism classes.
    """
    tree = None if tree_edges is None else frozenset(tree_edges)
    match obj:
        case BoundaryMap():
            all_marks = tuple(obj.marked_vertices) + tuple(marks)
            return min(
                _rooted_code(obj.map, dart, tree, all_marks, (obj.external_face,))
                for dart in obj.boundary_darts
            )
        case DecoratedMap():
            if tree is None:
                tree = obj.tree_edges
            faces = () if obj.external_face is None else (obj.external_face,)
            start = obj.map.root_dart if root is None else root
            return _rooted_code(obj.map, start, tree, tuple(marks), faces)
        case PlanarMap():
            start = obj.root_dart if root is None else root
            return _rooted_code(obj, start, tree, tuple(marks), ())
        case _:
            raise TypeError(f"Unsupported type: {type(obj).__name__}")


def unrooted_code(
    planar_map: PlanarMap,
    *,
    tree_edges: Optional[Iterable[int]] = None,
    marks: Sequence[int] = (),
    face_marks: Sequence[int] = (),
) -> bytes:
    """Smallest rooted code over all choices of root dart."""
    tree = None if tree_edges is None else frozenset(tree_edges)
    if not planar_map.dart_count:
        return _rooted_code(planar_map, None, tree, tuple(marks), tuple(face_marks))
    return min(
        _rooted_code(planar_map, dart, tree, tuple(marks), tuple(face_marks))
        for dart in range(planar_map.dart_count)
    )


class MapRecord(NamedTuple):
    # pylint: disable=missing-class-docstring
    map: PlanarMap
    tree_edges: Optional[FrozenSet[int]] = None
    external_face: Optional[int] = None
    marks: Tuple[int, ...] = ()


def format_map(
    planar_map: PlanarMap,
    *,
    tree_edges: Optional[Iterable[int]] = None,
    external_face: Optional[int] = None,
    marks: Sequence[int] = (),
) -> str:
    """Line-oriented text record of a map and its decorations."""
    root = "-" if planar_map.root_dart is None else str(planar_map.root_dart)
    lines = [f"MAP {planar_map.dart_count} {root}"]
    lines.extend(
        f"{dart} {planar_map.next_darts[dart]} {dart ^ 1}"
        for dart in range(planar_map.dart_count)
    )
    if tree_edges is not None:
        lines.append(" ".join(["TREE", *(str(edge) for edge in sorted(tree_edges))]))
    if external_face is not None:
        lines.append(f"EXTFACE {external_face}")
    if marks:
        lines.append(" ".join(["MARK", *(str(vertex) for vertex in marks)]))
    return "\n".join(lines) + "\n"


def parse_map(text: str) -> MapRecord:
    """
    Parses a record written by format_map().

    Darts may be numbered with any twin involution; they are renumbered so that twin(d) = d ^ 1.
    Edge, face and vertex identifiers in the trailers refer to the numbering of the record; edge e
    is the edge of dart 2e.
    """
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or lines[0][0] != "MAP" or len(lines[0]) != 3:
        raise InvalidMap("Missing MAP header!")
    dart_count = int(lines[0][1])
    root = None if lines[0][2] == "-" else int(lines[0][2])
    if len(lines) < 1 + dart_count:
        raise InvalidMap("Truncated map record!")

    next_darts = [0] * dart_count
    twin_darts = [0] * dart_count
    for tokens in lines[1 : 1 + dart_count]:
        dart, successor, other = (int(token) for token in tokens)
        next_darts[dart] = successor
        twin_darts[dart] = other

    relabeled = _pair_relabeling(twin_darts)
    planar_map = build_from_permutations(
        next_darts=next_darts, twin_darts=twin_darts, root_dart=root
    )

    tree_edges, external_face, marks = None, None, ()
    if dart_count:
        _, vertex_orbits = _orbits(next_darts)
        _, face_orbits = _orbits(
            [next_darts[twin_darts[dart]] for dart in range(dart_count)]
        )
    for tokens in lines[1 + dart_count :]:
        match tokens[0]:
            case "TREE":
                tree_edges = frozenset(
                    relabeled[2 * int(token)] >> 1 for token in tokens[1:]
                )
            case "EXTFACE":
                face = int(tokens[1])
                external_face = planar_map.face_of[relabeled[face_orbits[face][0]]]
            case "MARK":
                marks = tuple(
                    (
                        planar_map.vertex_of[relabeled[vertex_orbits[int(token)][0]]]
                        if dart_count
                        else 0
                    )
                    for token in tokens[1:]
                )
            case _:
                raise InvalidMap(f"Unknown trailer: {tokens[0]}")
    return MapRecord(
        map=planar_map, tree_edges=tree_edges, external_face=external_face, marks=marks
    )
