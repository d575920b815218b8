#!/usr/bin/env python

"""Mullin encoding of spanning-tree decorated maps as lattice walks."""

import logging
import math

from dataclasses import InitVar, dataclass
from enum import Enum
from typing import Dict, Iterator, List, NamedTuple, Optional, Set, Tuple, Union

import numpy as np

from scipy.special import gammaln

from .consts import (
    BRANCH_HORIZON_FACTOR,
    DEFAULT_BUFFER_RATIO,
    DEFAULT_MAX_BUFFER_RATIO,
    DEFAULT_REJECTION_BUDGET,
    ENUMERATION_MAX_EDGES,
    STEP_CHARS,
    STEP_D,
    STEP_L,
    STEP_R,
    STEP_U,
    STEP_VECTORS,
)
from .errors import (
    EmptyMap,
    HorizonTooShort,
    InvalidWalk,
    RejectionBudgetExceeded,
    TooLarge,
    WindowUnresolved,
)
from .planar_map import BoundaryMap, DecoratedMap, PlanarMap, vertex_map

LOGGER = logging.getLogger(__name__)

HORIZONTAL, VERTICAL = np.array(STEP_VECTORS, dtype=np.int64).T


class WalkKind(Enum):
    """Constraint carried by a lattice walk."""

    FREE = "free"
    QUADRANT_EXCURSION = "quadrant_excursion"
    BOUNDARY_EXCURSION = "boundary_excursion"
    QUADRANT_MEANDER = "quadrant_meander"


@dataclass(frozen=True, eq=False)
class LatticeWalk:
    """
    Walk with steps +e1 (R), -e1 (L), +e2 (U), -e2 (D), stored as step codes 0..3.

    boundary_length is the final horizontal coordinate of a boundary excursion.
    """

    steps: np.ndarray
    kind: WalkKind = WalkKind.FREE
    boundary_length: int = 0
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        steps = np.array(self.steps, dtype=np.int8).reshape(-1)
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "kind", WalkKind(self.kind))
        if validate:
            self.check()

    def check(self):
        """Raises InvalidWalk unless the walk satisfies the invariant of its kind."""
        if self.steps.size and (self.steps.min() < 0 or self.steps.max() > 3):
            raise InvalidWalk("Step codes must lie in 0..3!")
        if self.kind is WalkKind.FREE:
            return
        horizontal, vertical = self.coordinates()
        if horizontal.min() < 0 or vertical.min() < 0:
            raise InvalidWalk(f"{self.kind.value} leaves the quadrant!")
        end = (int(horizontal[-1]), int(vertical[-1]))
        match self.kind:
            case WalkKind.QUADRANT_EXCURSION:
                if end != (0, 0):
                    raise InvalidWalk(f"Excursion ends at {end}!")
            case WalkKind.BOUNDARY_EXCURSION:
                if self.boundary_length < 0 or end != (self.boundary_length, 0):
                    raise InvalidWalk(
                        f"Boundary excursion ends at {end}, "
                        f"not ({self.boundary_length}, 0)!"
                    )

    def __len__(self) -> int:
        return int(self.steps.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeWalk):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.boundary_length == other.boundary_length
            and np.array_equal(self.steps, other.steps)
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.boundary_length, self.steps.tobytes()))

    def __str__(self) -> str:
        return "".join(STEP_CHARS[step] for step in self.steps.tolist())

    @classmethod
    def from_string(
        cls, text: str, *, kind: WalkKind = WalkKind.FREE, boundary_length: int = 0
    ) -> "LatticeWalk":
        """Builds a walk from its R/L/U/D spelling."""
        try:
            steps = [STEP_CHARS.index(char) for char in text.strip()]
        except ValueError as exception:
            raise InvalidWalk(f"Unknown step in {text!r}") from exception
        return cls(steps=steps, kind=kind, boundary_length=boundary_length)

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Partial sums of both coordinates, including time 0."""
        steps = self.steps.astype(np.int64)
        horizontal = np.concatenate(([0], np.cumsum(HORIZONTAL[steps])))
        vertical = np.concatenate(([0], np.cumsum(VERTICAL[steps])))
        return horizontal, vertical


def format_walk(walk: LatticeWalk) -> str:
    """Text record: a WALK header and one character per step."""
    kind = walk.kind.value
    if walk.kind is WalkKind.BOUNDARY_EXCURSION:
        kind = f"{kind}:{walk.boundary_length}"
    return f"WALK {kind} {len(walk)}\n{walk}\n"


def parse_walks(text: str) -> List[LatticeWalk]:
    """Parses consecutive records written by format_walk()."""
    lines = text.splitlines()
    walks = []
    index = 0
    while index < len(lines):
        header = lines[index].split()
        index += 1
        if not header:
            continue
        if header[0] != "WALK" or len(header) != 3:
            raise InvalidWalk(f"Bad walk header: {' '.join(header)}")
        kind, _, boundary = header[1].partition(":")
        length = int(header[2])
        body = lines[index].strip() if index < len(lines) else ""
        index += 1
        if len(body) != length:
            raise InvalidWalk(f"Walk length {len(body)} differs from header {length}!")
        walks.append(
            LatticeWalk.from_string(
                body, kind=WalkKind(kind), boundary_length=int(boundary or 0)
            )
        )
    return walks


@dataclass
class PeanoState:
    # pylint: disable=too-many-instance-attributes
    """
    The contour tour traced by a walk.

    Vertices are numbered in order of discovery (vertex 0 is current at time 0). Step j crosses
    one edge and processes one dart at the current vertex: step_darts[j - 1]. Edges are numbered in
    order of their first crossing; dart 2e is processed at the first crossing, dart 2e + 1 at the
    second. Edges whose first crossing precedes the walk are created on the fly.
    """

    steps: np.ndarray
    step_darts: List[int]
    vertex_at_time: List[int]
    arcs: List[List[int]]
    parent_edge: List[int]
    entered: List[bool]
    exited: List[bool]
    dart_vertex: List[int]
    crossings: List[List[int]]
    tree: List[bool]

    @property
    def vertex_count(self) -> int:
        # pylint: disable=missing-function-docstring
        return len(self.arcs)

    @property
    def edge_count(self) -> int:
        # pylint: disable=missing-function-docstring
        return len(self.crossings)

    def is_complete(self, vertex: int, *, closed: bool = False) -> bool:
        """True when every dart at the vertex is processed inside the walk."""
        if closed and vertex == 0:
            return True
        return self.entered[vertex] and self.exited[vertex]

    def step_of_dart(self) -> Dict[int, int]:
        """Step index (1-based) at which each processed dart is processed."""
        return {dart: index for index, dart in enumerate(self.step_darts, start=1)}


def _bracket_partners(
    up: np.ndarray, down: np.ndarray, level: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pairs the crossings of one coordinate like brackets.

    Grouped by the gap they cross, crossings alternate up, down once a leading new
    minimum is set aside, so each matched down step directly follows its up step in
    (gap, time) order.

    Returns:
        Per time (index 0 unused), the time of the matching up step or -1; per step,
        whether it is a down step reaching a new minimum.
    """
    length = up.size
    partner = np.full(length + 1, -1, dtype=np.int64)
    lowest = np.minimum.accumulate(level)[:-1]
    orphan = down & (level[1:] < lowest)
    moving = np.flatnonzero(up | down) + 1
    gap = np.minimum(level[moving - 1], level[moving])
    order = moving[np.argsort(gap, kind="stable")]
    rank = np.empty(length + 1, dtype=np.int64)
    rank[order] = np.arange(order.size)
    closing = np.flatnonzero(down & ~orphan) + 1
    partner[closing] = order[rank[closing] - 1]
    return partner, orphan


def trace(walk: LatticeWalk) -> PeanoState:
    # pylint: disable=too-many-locals
    """Runs the contour tour of a walk, matching each second crossing with its first."""
    steps = walk.steps.astype(np.int64)
    length = steps.size
    horizontal, vertical = walk.coordinates()
    is_r, is_l = steps == STEP_R, steps == STEP_L
    is_u, is_d = steps == STEP_U, steps == STEP_D
    tree_partner, new_ancestor = _bracket_partners(is_r, is_l, horizontal)
    dual_partner, unmatched_d = _bracket_partners(is_u, is_d, vertical)
    partner = np.maximum(tree_partner, dual_partner)

    # Edges are numbered by the time of their first crossing.
    fresh = is_r | is_u | new_ancestor | unmatched_d
    created = np.flatnonzero(fresh) + 1
    edge_at = np.full(length + 1, -1, dtype=np.int64)
    edge_at[created] = np.arange(created.size)
    matched = np.flatnonzero(~fresh) + 1
    edge_at[matched] = edge_at[partner[matched]]
    step_darts = 2 * edge_at[1:] + (is_l | is_d)
    creates_vertex = is_r | new_ancestor
    tree = creates_vertex[created - 1]

    # The current vertex is the one created by the last arrival at the current
    # horizontal level by an R step or a new minimum (vertex 0 at time 0).
    makers = np.flatnonzero(creates_vertex) + 1
    made = np.full(length + 1, -1, dtype=np.int64)
    made[0] = 0
    made[makers] = np.arange(1, makers.size + 1)
    by_level = np.argsort(horizontal, kind="stable")
    marker = np.where(made[by_level] >= 0, np.arange(length + 1), -1)
    vertex_at_time = np.empty(length + 1, dtype=np.int64)
    vertex_at_time[by_level] = made[by_level[np.maximum.accumulate(marker)]]
    vertex_count = makers.size + 1

    dart_vertex = np.full(2 * created.size, -1, dtype=np.int64)
    r_times = np.flatnonzero(is_r) + 1
    ancestor_times = np.flatnonzero(new_ancestor) + 1
    dart_vertex[2 * edge_at[r_times] + 1] = vertex_at_time[r_times]
    dart_vertex[2 * edge_at[ancestor_times]] = vertex_at_time[ancestor_times]
    dart_vertex[step_darts] = vertex_at_time[:-1]

    parent_edge = np.full(vertex_count, -1, dtype=np.int64)
    tree_edges = np.flatnonzero(tree)
    parent_edge[dart_vertex[2 * tree_edges + 1]] = tree_edges
    entered = np.zeros(vertex_count, dtype=bool)
    entered[vertex_at_time[r_times]] = True
    exited = np.zeros(vertex_count, dtype=bool)
    exited[vertex_at_time[np.flatnonzero(is_l)]] = True

    # Darts at each vertex in processing order; a new ancestor starts with its edge.
    arc_vertex = np.concatenate((vertex_at_time[:-1], vertex_at_time[ancestor_times]))
    arc_time = np.concatenate((np.arange(1, length + 1), ancestor_times))
    arc_dart = np.concatenate((step_darts, 2 * edge_at[ancestor_times]))
    order = np.lexsort((arc_time, arc_vertex))
    darts = arc_dart[order].tolist()
    bounds = np.concatenate(
        ([0], np.cumsum(np.bincount(arc_vertex, minlength=vertex_count)))
    ).tolist()
    arcs = [darts[first:last] for first, last in zip(bounds[:-1], bounds[1:])]

    second = np.full(created.size, -1, dtype=np.int64)
    second[edge_at[matched]] = matched
    crossings = [
        [first] if last < 0 else [first, last]
        for first, last in zip(created.tolist(), second.tolist())
    ]

    return PeanoState(
        steps=walk.steps,
        step_darts=step_darts.tolist(),
        vertex_at_time=vertex_at_time.tolist(),
        arcs=arcs,
        parent_edge=parent_edge.tolist(),
        entered=entered.tolist(),
        exited=exited.tolist(),
        dart_vertex=dart_vertex.tolist(),
        crossings=crossings,
        tree=tree.tolist(),
    )


def _next_from_rotations(dart_count: int, rotations: List[List[int]]) -> List[int]:
    next_darts = [0] * dart_count
    for rotation in rotations:
        for index, dart in enumerate(rotation):
            next_darts[dart] = rotation[(index + 1) % len(rotation)]
    return next_darts


def decode(walk: LatticeWalk) -> DecoratedMap:
    """
    Decodes an excursion into a rooted map with a spanning tree.

    R/L steps are the first/second crossings of tree edges, U/D those of dual tree edges. The root
    dart is the twin of the first dart processed, so the root vertex is where the walk starts.
    A boundary excursion ending at (l, 0) has l unmatched R steps: they form the boundary cycle,
    which closes up at the starting vertex; the tree is wired (contains the boundary).
    """
    if walk.kind not in (WalkKind.QUADRANT_EXCURSION, WalkKind.BOUNDARY_EXCURSION):
        raise InvalidWalk(f"Cannot decode a {walk.kind.value} walk!")
    walk.check()
    if not len(walk):
        return DecoratedMap(map=vertex_map(), tree_edges=frozenset())

    state = trace(walk)
    spine = []
    vertex = state.vertex_at_time[-1]
    while vertex != 0:
        spine.append(vertex)
        vertex = state.dart_vertex[2 * state.parent_edge[vertex]]
    spine.reverse()

    rotations = {vertex: list(darts) for vertex, darts in enumerate(state.arcs)}
    boundary_darts = [2 * state.parent_edge[vertex] + 1 for vertex in spine]
    for vertex, dart in zip(spine, boundary_darts):
        rotations[vertex] = [dart] + rotations[vertex]
    if spine:
        rotations[0] = rotations[0] + rotations.pop(spine[-1])

    dart_count = 2 * state.edge_count
    planar_map = PlanarMap(
        next_darts=_next_from_rotations(dart_count, list(rotations.values())),
        root_dart=state.step_darts[0] ^ 1,
    )
    tree_edges = frozenset(edge for edge, is_tree in enumerate(state.tree) if is_tree)
    external_face = planar_map.face_of[boundary_darts[0]] if spine else None
    LOGGER.debug(
        "Decoded %d steps: %d vertices, %d edges, boundary %d.",
        len(walk),
        planar_map.vertex_count,
        planar_map.edge_count,
        len(spine),
    )
    return DecoratedMap(
        map=planar_map, tree_edges=tree_edges, external_face=external_face
    )


def encode(decorated: DecoratedMap) -> LatticeWalk:
    """
    Encodes a decorated map by touring it from the root.

    The tour starts with the twin of the root dart. A tree dart is crossed (R on the first visit
    of its edge, L on the second) and the tour continues after its twin; a dual tree dart emits
    U or D and the tour continues around the same vertex. With a wired boundary, the darts of the
    external face are never visited and the boundary edges are crossed once.
    """
    planar_map = decorated.map
    if planar_map.root_dart is None:
        return LatticeWalk(steps=(), kind=WalkKind.QUADRANT_EXCURSION)

    external = set(decorated.boundary_darts)
    next_darts = planar_map.next_darts
    tree_edges = decorated.tree_edges
    seen = bytearray(planar_map.edge_count)
    steps = np.empty(planar_map.dart_count - len(external), dtype=np.int8)
    dart = planar_map.root_dart ^ 1
    for index in range(steps.size):
        edge = dart >> 1
        if edge in tree_edges:
            steps[index] = STEP_L if seen[edge] else STEP_R
            dart = next_darts[dart ^ 1]
        else:
            steps[index] = STEP_D if seen[edge] else STEP_U
            dart = next_darts[dart]
        seen[edge] = 1

    if external:
        return LatticeWalk(
            steps=steps,
            kind=WalkKind.BOUNDARY_EXCURSION,
            boundary_length=len(external),
        )
    return LatticeWalk(steps=steps, kind=WalkKind.QUADRANT_EXCURSION)


def enumerate_excursions(
    edges: int,
    kind: WalkKind = WalkKind.QUADRANT_EXCURSION,
    *,
    boundary_length: int = 0,
    cap: int = ENUMERATION_MAX_EDGES,
) -> Iterator[LatticeWalk]:
    """
    Lists all excursions of a map size in lexicographic order of the step codes (R < L < U < D).

    Args:
        edges: Total edge count of the encoded maps.
        kind: quadrant_excursion (length 2n) or boundary_excursion (length 2n - l, ending at (l, 0)).
        boundary_length: l for boundary excursions.
        cap: Largest edge count accepted.
    """
    if edges > cap:
        raise TooLarge(f"Refusing to enumerate excursions with {edges} > {cap} edges!")
    kind = WalkKind(kind)
    if kind is WalkKind.QUADRANT_EXCURSION:
        boundary_length = 0
    elif kind is not WalkKind.BOUNDARY_EXCURSION:
        raise ValueError(f"Cannot enumerate {kind.value} walks!")
    length = 2 * edges - boundary_length
    if length < 0 or boundary_length > edges:
        return

    prefix = [0] * length

    def extend(position: int, horizontal: int, vertical: int) -> Iterator[LatticeWalk]:
        remaining = length - position
        if remaining == 0:
            yield LatticeWalk(
                steps=prefix,
                kind=kind,
                boundary_length=boundary_length,
                validate=False,
            )
            return
        for step, (dx, dy) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
            x, y = horizontal + dx, vertical + dy
            if x < 0 or y < 0 or abs(x - boundary_length) + y > remaining - 1:
                continue
            prefix[position] = step
            yield from extend(position + 1, x, y)

    yield from extend(0, 0, 0)


def _log_binomial(total: int, chosen: np.ndarray) -> np.ndarray:
    return gammaln(total + 1) - gammaln(chosen + 1) - gammaln(total - chosen + 1)


def _log_nonnegative_paths(length: np.ndarray, end: int) -> np.ndarray:
    """Log-count of +-1 paths of the given lengths staying >= 0 and ending at `end` (ballot numbers)."""
    downs = (length - end) // 2
    return (
        np.log(end + 1)
        - np.log(length - downs + 1)
        + gammaln(length + 1)
        - gammaln(downs + 1)
        - gammaln(length - downs + 1)
    )


def _nonnegative_path(length: int, end: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform +-1 path of a given length staying >= 0 and ending at `end`, by the cycle lemma."""
    ups = (length + end) // 2 + 1
    downs = (length - end) // 2
    sequence = np.concatenate(
        (np.ones(ups, dtype=np.int8), -np.ones(downs, dtype=np.int8))
    )
    rng.shuffle(sequence)
    prefix = np.concatenate(([0], np.cumsum(sequence[:-1], dtype=np.int64)))
    level = prefix.min() + rng.integers(end + 1)
    pivot = int(np.flatnonzero(prefix == level)[-1])
    return np.roll(sequence, -pivot)[1:]


def sample_boundary_excursion(
    edges: int, boundary_length: int, rng: np.random.Generator
) -> LatticeWalk:
    """
    Uniform walk among boundary excursions of maps with `edges` edges and boundary length l.

    The horizontal step count is drawn with its exact weight, then both coordinate paths are drawn
    uniformly and interleaved uniformly. l = 0 gives a uniform quadrant excursion.
    """
    if not 0 <= boundary_length <= edges:
        raise ValueError(f"Boundary length {boundary_length} not within [0, {edges}]!")
    length = 2 * edges - boundary_length
    horizontal_counts = np.arange(boundary_length, length + 1, 2)
    log_weights = (
        _log_binomial(length, horizontal_counts)
        + _log_nonnegative_paths(horizontal_counts, boundary_length)
        + _log_nonnegative_paths(length - horizontal_counts, 0)
    )
    weights = np.exp(log_weights - log_weights.max())
    horizontal_count = int(rng.choice(horizontal_counts, p=weights / weights.sum()))

    horizontal = _nonnegative_path(horizontal_count, boundary_length, rng)
    vertical = _nonnegative_path(length - horizontal_count, 0, rng)
    mask = np.zeros(length, dtype=bool)
    mask[rng.choice(length, size=horizontal_count, replace=False)] = True
    steps = np.empty(length, dtype=np.int8)
    steps[mask] = np.where(horizontal > 0, STEP_R, STEP_L)
    steps[~mask] = np.where(vertical > 0, STEP_U, STEP_D)
    if boundary_length:
        return LatticeWalk(
            steps=steps,
            kind=WalkKind.BOUNDARY_EXCURSION,
            boundary_length=boundary_length,
        )
    return LatticeWalk(steps=steps, kind=WalkKind.QUADRANT_EXCURSION)


def sample_quadrant_excursion(edges: int, rng: np.random.Generator) -> LatticeWalk:
    """Uniform quadrant excursion of length 2 * edges."""
    return sample_boundary_excursion(edges, 0, rng)


def sample_free_walk(length: int, rng: np.random.Generator) -> LatticeWalk:
    # pylint: disable=missing-function-docstring
    return LatticeWalk(steps=_random_steps(length, rng), kind=WalkKind.FREE)


def rejection_sample_excursion(
    edges: int, rng: np.random.Generator, *, budget: int = DEFAULT_REJECTION_BUDGET
) -> LatticeWalk:
    """Quadrant excursion by plain rejection from free walks; an oracle for the exact sampler."""
    for attempt in range(1, budget + 1):
        steps = _random_steps(2 * edges, rng)
        walk = LatticeWalk(steps=steps, validate=False)
        horizontal, vertical = walk.coordinates()
        inside = horizontal.min() >= 0 and vertical.min() >= 0
        if inside and horizontal[-1] == 0 and vertical[-1] == 0:
            LOGGER.debug(
                "Excursion of length %d accepted after %d attempts.", 2 * edges, attempt
            )
            return LatticeWalk(
                steps=steps, kind=WalkKind.QUADRANT_EXCURSION, validate=False
            )
    raise RejectionBudgetExceeded(
        f"No excursion of length {2 * edges} in {budget} attempts!"
    )


def accept_boundary_rooting(decorated: DecoratedMap, rng: np.random.Generator) -> bool:
    """
    Rejection step turning decoded boundary excursions into maps rooted on a boundary edge.

    A uniform boundary excursion roots its map at a uniform inner corner of a boundary vertex;
    accepting with probability l / (number of such corners) reweights it to boundary-edge rooting.
    """
    boundary = decorated.boundary_view()
    degrees = sum(decorated.map.degree(vertex) for vertex in boundary.boundary_vertices)
    corners = degrees - boundary.boundary_length
    return bool(rng.random() * corners < boundary.boundary_length)


def mullin_adjacency(walk: LatticeWalk) -> Set[Tuple[int, int]]:
    """
    Adjacency of walk steps (1-based): consecutive steps, and the two crossings of each edge.

    For quadrant excursions the tour is closed, so the last step is adjacent to the first.
    """
    state = trace(walk)
    length = len(walk)
    pairs = {(index, index + 1) for index in range(1, length)}
    if walk.kind is WalkKind.QUADRANT_EXCURSION and length > 1:
        pairs.add((1, length))
    for crossing in state.crossings:
        if len(crossing) == 2:
            pairs.add((crossing[0], crossing[1]))
    return pairs


@dataclass(frozen=True)
class WindowSubmap:
    """Submap traced by the tour during a time window, with correspondences to the tour."""

    map: PlanarMap
    external_face: Optional[int]
    start: int
    end: int
    vertex_index: Dict[int, int]
    edge_index: Dict[int, int]

    @property
    def boundary_map(self) -> BoundaryMap:
        # pylint: disable=missing-function-docstring
        if self.external_face is None:
            raise EmptyMap("Window submap without edges has no external face!")
        return BoundaryMap(
            map=self.map, external_face=self.external_face, require_simple=False
        )


def extract_window(
    state: PeanoState, start: int, end: int, *, closed: bool = False
) -> WindowSubmap:
    # pylint: disable=too-many-locals
    """
    Submap on the vertices visited by the tour at times start..end, with every edge between them.

    Args:
        state: Traced walk.
        start: First time of the window.
        end: Last time of the window.
        closed: The walk is an excursion, so its starting vertex is complete.

    Returns:
        The submap, rooted at a dart ending at the vertex current at time start.
    """
    horizon = len(state.vertex_at_time) - 1
    if not 0 <= start < end <= horizon:
        raise ValueError(
            f"Invalid window [{start}, {end}] for a walk of length {horizon}!"
        )

    window = sorted(set(state.vertex_at_time[start : end + 1]))
    inside = set(window)
    for vertex in window:
        if not state.is_complete(vertex, closed=closed):
            raise WindowUnresolved(f"Vertex {vertex} is visited outside the walk!")

    dart_vertex = state.dart_vertex
    rotations = {
        vertex: [dart for dart in state.arcs[vertex] if dart_vertex[dart ^ 1] in inside]
        for vertex in window
    }
    kept = sorted({dart >> 1 for rotation in rotations.values() for dart in rotation})
    edge_index = {edge: index for index, edge in enumerate(kept)}

    def relabeled(dart: int) -> int:
        return 2 * edge_index[dart >> 1] + (dart & 1)

    first = state.vertex_at_time[start]
    if not kept:
        return WindowSubmap(
            map=vertex_map(),
            external_face=None,
            start=start,
            end=end,
            vertex_index={first: 0},
            edge_index={},
        )

    next_darts = _next_from_rotations(
        2 * len(kept),
        [
            [relabeled(dart) for dart in rotation]
            for rotation in rotations.values()
            if rotation
        ],
    )
    root = None
    for time in range(start, end):
        dart = state.step_darts[time]
        if state.vertex_at_time[time] == first and dart >> 1 in edge_index:
            root = relabeled(dart) ^ 1
            break
    if root is None:
        root = relabeled(rotations[first][0]) ^ 1
    planar_map = PlanarMap(next_darts=next_darts, root_dart=root)
    vertex_index = {
        vertex: planar_map.vertex_of[relabeled(rotations[vertex][0])]
        for vertex in window
    }
    external_face = min(
        range(planar_map.face_count),
        key=lambda face: (-len(planar_map.face_darts[face]), face),
    )
    return WindowSubmap(
        map=planar_map,
        external_face=external_face,
        start=start,
        end=end,
        vertex_index=vertex_index,
        edge_index=edge_index,
    )


def window_submap(walk: LatticeWalk, start: int, end: int) -> BoundaryMap:
    """The submap M|[start, end] decoded from a walk; see extract_window()."""
    closed = walk.kind in (WalkKind.QUADRANT_EXCURSION, WalkKind.BOUNDARY_EXCURSION)
    return extract_window(trace(walk), start, end, closed=closed).boundary_map


def _random_steps(count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 4, size=count, dtype=np.int8)


def _horizontal_path(steps: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(HORIZONTAL[steps.astype(np.int64)])))


def _is_resolved(horizontal: np.ndarray, start: int, end: int) -> bool:
    """Every vertex current in [start, end] is entered after time 0 and left before the end."""
    if start == 0 or end == horizontal.size - 1:
        return False
    lowest = horizontal[start : end + 1].min()
    return horizontal[:start].min() < lowest and horizontal[end + 1 :].min() < lowest


class SampledWindow(NamedTuple):
    # pylint: disable=missing-class-docstring
    state: PeanoState
    window: WindowSubmap
    centre_time: int


def _buffered_window(
    core: np.ndarray,
    rng: np.random.Generator,
    *,
    buffer_ratio: float,
    max_buffer_ratio: float,
) -> Tuple[np.ndarray, int, int]:
    """Surrounds a core walk with random buffers, doubling them until the core window is resolved."""
    size = max(core.size, 1)
    buffer = max(1, math.ceil(buffer_ratio * size))
    before = _random_steps(buffer, rng)
    after = _random_steps(buffer, rng)
    while True:
        steps = np.concatenate((before, core, after))
        horizontal = _horizontal_path(steps)
        start = before.size
        end = start + core.size
        if _is_resolved(horizontal, start, end):
            return steps, start, end
        if before.size > max_buffer_ratio * size:
            raise WindowUnresolved(
                f"Window of {core.size} steps unresolved "
                f"with buffers of {before.size} steps!"
            )
        LOGGER.debug(
            "Window of %d steps unresolved; doubling buffers of %d steps.",
            core.size,
            before.size,
        )
        before = np.concatenate((_random_steps(before.size, rng), before))
        after = np.concatenate((after, _random_steps(after.size, rng)))


def sample_window(
    length: int,
    rng: np.random.Generator,
    *,
    buffer_ratio: float = DEFAULT_BUFFER_RATIO,
    max_buffer_ratio: float = DEFAULT_MAX_BUFFER_RATIO,
) -> SampledWindow:
    """
    Window M|[0, length] of the infinite-volume map, decoded from a buffered free walk.

    The window is centred on the vertex current at the middle of the window.
    """
    if length < 1:
        raise ValueError("Window length must be positive!")
    core = _random_steps(length, rng)
    steps, start, end = _buffered_window(
        core, rng, buffer_ratio=buffer_ratio, max_buffer_ratio=max_buffer_ratio
    )
    state = trace(LatticeWalk(steps=steps, validate=False))
    return SampledWindow(
        state=state,
        window=extract_window(state, start, end),
        centre_time=start + length // 2,
    )


class BranchEdge(NamedTuple):
    # pylint: disable=missing-class-docstring
    time: int
    edge: int


def tree_branch_to_infinity(
    walk: Union[LatticeWalk, PeanoState],
    horizon: int,
    *,
    count: Optional[int] = None,
    start: int = 0,
) -> List[BranchEdge]:
    """
    Edges of the tree branch from the vertex current at time `start` towards infinity.

    They are the L steps reaching a new running minimum of the horizontal coordinate after `start`;
    consecutive ones join consecutive ancestors.

    Args:
        walk: The walk, or its trace.
        horizon: Last time examined.
        count: Number of branch edges required (all found up to the horizon when omitted).
        start: Time of the starting vertex.
    """
    state = walk if isinstance(walk, PeanoState) else trace(walk)
    horizontal = _horizontal_path(state.steps)
    segment = horizontal[start : horizon + 1]
    lowest = np.minimum.accumulate(segment)[:-1]
    times = np.flatnonzero(segment[1:] < lowest) + start + 1
    if count is not None:
        if times.size < count:
            raise HorizonTooShort(
                f"Found {times.size} of {count} branch edges before time {horizon}!"
            )
        times = times[:count]
    return [
        BranchEdge(time=int(time), edge=state.step_darts[time - 1] >> 1)
        for time in times
    ]


class SampledBranch(NamedTuple):
    # pylint: disable=missing-class-docstring
    state: PeanoState
    window: WindowSubmap
    centre_time: int
    branch: List[BranchEdge]


def _first_passage(
    edges: int, horizon: int, rng: np.random.Generator
) -> Tuple[np.ndarray, int]:
    """
    Walk whose horizontal coordinate drops by `edges` within `horizon` steps.

    Walks missing the horizon are resampled, so the passage time is conditioned on
    being at most horizon; with horizon proportional to edges**2 the conditioning is
    the same at every scale.
    """
    if horizon < edges:
        raise HorizonTooShort(f"No drop by {edges} fits in {horizon} steps!")
    for _ in range(DEFAULT_REJECTION_BUDGET):
        forward = _random_steps(horizon, rng)
        horizontal = np.cumsum(HORIZONTAL[forward.astype(np.int64)])
        reached = np.flatnonzero(horizontal <= -edges)
        if reached.size:
            hit = int(reached[0]) + 1
            return forward[:hit], hit
    raise HorizonTooShort(
        f"Branch of {edges} edges never completed within {horizon} steps!"
    )


def sample_branch_window(
    edges: int,
    rng: np.random.Generator,
    *,
    buffer_ratio: float = DEFAULT_BUFFER_RATIO,
    max_buffer_ratio: float = DEFAULT_MAX_BUFFER_RATIO,
    horizon_factor: float = BRANCH_HORIZON_FACTOR,
) -> SampledBranch:
    """
    Window of the infinite-volume map containing the first `edges` edges of the tree branch from
    the centre vertex to infinity.

    The walk after the centre time runs until its horizontal coordinate first drops by `edges`,
    which must happen within horizon_factor * edges**2 steps (see _first_passage()); the window
    extends equally far back.
    """
    if edges < 1:
        raise ValueError("Branch length must be positive!")
    horizon = max(1, math.ceil(horizon_factor * edges * edges))
    forward, hit = _first_passage(edges, horizon, rng)
    core = np.concatenate((_random_steps(hit, rng), forward))
    steps, start, end = _buffered_window(
        core, rng, buffer_ratio=buffer_ratio, max_buffer_ratio=max_buffer_ratio
    )
    state = trace(LatticeWalk(steps=steps, validate=False))
    centre_time = start + hit
    branch = tree_branch_to_infinity(state, end, count=edges, start=centre_time)
    return SampledBranch(
        state=state,
        window=extract_window(state, start, end),
        centre_time=centre_time,
        branch=branch,
    )
