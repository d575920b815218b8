#!/usr/bin/env python

"""Discrete one-sided mated-CRT maps built from pairs of walks."""

import logging

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from .consts import DEFAULT_REJECTION_BUDGET
from .errors import BadLength, InvalidWalk, RejectionBudgetExceeded
from .mullin_codec import LatticeWalk, WalkKind
from .planar_map import bfs_layers

LOGGER = logging.getLogger(__name__)


class PairKind(Enum):
    """Law the coordinates of a walk pair were drawn from."""

    FREE = "free"
    QUADRANT_CONDITIONED = "quadrant_conditioned"
    MULLIN = "mullin"


@dataclass(frozen=True, eq=False)
class WalkPair:
    """
    Partial sums (L, R) of a pair of integer walks started at time 0.

    Attributes:
        left: L_0 .. L_N.
        right: R_0 .. R_N.
        kind: Origin of the pair.
        steps_per_unit: Walk steps per unit of continuum time.
    """

    left: np.ndarray
    right: np.ndarray
    kind: PairKind = PairKind.FREE
    steps_per_unit: int = 1

    def __post_init__(self):
        for name in ("left", "right"):
            values = np.array(getattr(self, name), dtype=np.int64)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        if (
            self.left.ndim != 1
            or self.left.shape != self.right.shape
            or not self.left.size
        ):
            raise InvalidWalk("Coordinates must be nonempty sequences of equal length!")
        if any(
            np.abs(np.diff(values)).max(initial=0) > 1
            for values in (self.left, self.right)
        ):
            raise InvalidWalk("Increments must lie in {-1, 0, 1}!")

    def __len__(self) -> int:
        return self.left.size - 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkPair):
            return NotImplemented
        return np.array_equal(self.left, other.left) and np.array_equal(
            self.right, other.right
        )

    def __hash__(self) -> int:
        return hash((self.left.tobytes(), self.right.tobytes()))

    def reversed(self) -> "WalkPair":
        """The time reversal, started from the final values."""
        return self._with(self.left[::-1], self.right[::-1])

    def window(self, first: int, last: int, cell_size: int) -> "WalkPair":
        """Times covered by cells first..last (1-based, inclusive)."""
        if not 1 <= first <= last or last * cell_size > len(self):
            raise ValueError(f"Invalid cell window [{first}, {last}]!")
        times = slice((first - 1) * cell_size, last * cell_size + 1)
        return self._with(self.left[times], self.right[times])

    def _with(self, left: np.ndarray, right: np.ndarray) -> "WalkPair":
        return WalkPair(
            left=left, right=right, kind=self.kind, steps_per_unit=self.steps_per_unit
        )


@dataclass(frozen=True, eq=False)
class MatedCrtGraph:
    """
    Graph on cells 1..n; cell k covers the times (k - 1) * cell_size .. k * cell_size.

    Attributes:
        n: Number of cells.
        cell_size: Walk steps per cell.
        edges: Adjacent pairs (k1, k2), k1 < k2.
        lower: Cells where a coordinate reaches a running infimum from the left end.
        upper: Cells where a coordinate reaches a running infimum from the right end.
    """

    n: int
    cell_size: int
    edges: FrozenSet[Tuple[int, int]]
    lower: FrozenSet[int] = frozenset()
    upper: FrozenSet[int] = frozenset()

    @cached_property
    def adjacency(self) -> Dict[int, Tuple[int, ...]]:
        # pylint: disable=missing-function-docstring
        neighbors: Dict[int, List[int]] = {cell: [] for cell in range(1, self.n + 1)}
        for first, second in self.edges:
            neighbors[first].append(second)
            neighbors[second].append(first)
        return {cell: tuple(sorted(values)) for cell, values in neighbors.items()}

    def neighbors(self, vertex: int) -> Tuple[int, ...]:
        # pylint: disable=missing-function-docstring
        return self.adjacency[vertex]

    def vertices(self) -> range:
        # pylint: disable=missing-function-docstring
        return range(1, self.n + 1)

    @property
    def boundary(self) -> FrozenSet[int]:
        # pylint: disable=missing-function-docstring
        return self.lower | self.upper


def _cells_of_time(time: int, cell_size: int, cells: int) -> Tuple[int, ...]:
    if time % cell_size:
        return (time // cell_size + 1,)
    index = time // cell_size
    return tuple(cell for cell in (index, index + 1) if 1 <= cell <= cells)


def _cell_count(pair: WalkPair, cell_size: int) -> int:
    if cell_size < 1:
        raise BadLength(f"Invalid cell size: {cell_size}")
    if not len(pair) or len(pair) % cell_size:
        raise BadLength(
            f"Walk length {len(pair)} is not a positive multiple of {cell_size}!"
        )
    return len(pair) // cell_size


def _infimum_pairs(values: np.ndarray, cell_size: int, cells: int, edges: set):
    """Adds the cell pairs joined by equal values with nothing lower in between."""
    # Stack of (value, cells attaining it since the last dip below it), increasing.
    stack: List[Tuple[int, List[int]]] = []
    for time, value in enumerate(values.tolist()):
        current = _cells_of_time(time, cell_size, cells)
        while stack and stack[-1][0] > value:
            stack.pop()
        if stack and stack[-1][0] == value:
            group = stack[-1][1]
            for cell in current:
                for other in group:
                    if other < cell:
                        edges.add((other, cell))
            for cell in current:
                if group[-1] != cell:
                    group.append(cell)
        else:
            stack.append((value, list(current)))


def _running_infimum_cells(values: np.ndarray, cell_size: int, cells: int) -> set:
    times = np.flatnonzero(values <= np.minimum.accumulate(values))
    found = set()
    for time in times.tolist():
        found.update(_cells_of_time(time, cell_size, cells))
    return found


def boundary_sets(
    pair: WalkPair, cell_size: int, interval: Optional[Tuple[int, int]] = None
) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """
    Lower and upper boundary of the graph restricted to a cell interval.

    A cell is in the lower (upper) boundary when L or R, read forwards from the left
    end (backwards from the right end) of the interval, reaches a running infimum
    inside the cell. Ties count.

    Args:
        pair: The walk pair.
        cell_size: Walk steps per cell.
        interval: First and last cell (all cells when omitted).

    Returns:
        (lower, upper) as sets of cells of the whole graph.
    """
    cells = _cell_count(pair, cell_size)
    first, last = interval or (1, cells)
    window = pair.window(first, last, cell_size)
    count = last - first + 1
    lower, upper = set(), set()
    for values in (window.left, window.right):
        lower |= _running_infimum_cells(values, cell_size, count)
        reversed_cells = _running_infimum_cells(values[::-1], cell_size, count)
        upper |= {count + 1 - cell for cell in reversed_cells}
    offset = first - 1
    return (
        frozenset(cell + offset for cell in lower),
        frozenset(cell + offset for cell in upper),
    )


def build_graph(pair: WalkPair, cell_size: int) -> MatedCrtGraph:
    """
    Cells k1 < k2 are adjacent when times t1 <= t2 in them have L (or R) equal at
    both and no smaller in between. Consecutive cells share a time, so they are
    always adjacent.

    Raises:
        BadLength: The walk length is not a positive multiple of the cell size.
    """
    cells = _cell_count(pair, cell_size)
    edges = {(cell, cell + 1) for cell in range(1, cells)}
    _infimum_pairs(pair.left, cell_size, cells, edges)
    _infimum_pairs(pair.right, cell_size, cells, edges)
    lower, upper = boundary_sets(pair, cell_size)
    LOGGER.debug("Mated-CRT graph: %d cells, %d edges.", cells, len(edges))
    return MatedCrtGraph(
        n=cells, cell_size=cell_size, edges=frozenset(edges), lower=lower, upper=upper
    )


def build_graph_bruteforce(pair: WalkPair, cell_size: int) -> MatedCrtGraph:
    """Quadratic scan over all pairs of times; reference for build_graph()."""
    cells = _cell_count(pair, cell_size)
    edges = set()
    for values in (pair.left.tolist(), pair.right.tolist()):
        for start, value in enumerate(values):
            lowest = value
            for end in range(start, len(values)):
                lowest = min(lowest, values[end])
                if lowest < value:
                    break
                if values[end] != value:
                    continue
                for first in _cells_of_time(start, cell_size, cells):
                    for second in _cells_of_time(end, cell_size, cells):
                        if first < second:
                            edges.add((first, second))
    lower, upper = boundary_sets(pair, cell_size)
    return MatedCrtGraph(
        n=cells, cell_size=cell_size, edges=frozenset(edges), lower=lower, upper=upper
    )


def pitman_transform(pair: WalkPair) -> WalkPair:
    """2 * (running maximum) - walk, per coordinate."""
    return WalkPair(
        left=2 * np.maximum.accumulate(pair.left) - pair.left,
        right=2 * np.maximum.accumulate(pair.right) - pair.right,
        kind=pair.kind,
        steps_per_unit=pair.steps_per_unit,
    )


def negate(pair: WalkPair) -> WalkPair:
    # pylint: disable=missing-function-docstring
    return WalkPair(
        left=-pair.left,
        right=-pair.right,
        kind=pair.kind,
        steps_per_unit=pair.steps_per_unit,
    )


def pitman_graph_identity_check(pair: WalkPair, cell_size: int = 1) -> bool:
    """True when the Pitman transform and the negated pair give the same graph."""
    expected = build_graph(negate(pair), cell_size).edges
    actual = build_graph(pitman_transform(pair), cell_size).edges
    if actual != expected:
        LOGGER.warning(
            "Pitman identity fails for a pair of length %d: %d edges differ.",
            len(pair),
            len(actual ^ expected),
        )
        return False
    return True


def _simple_walk(length: int, rng: np.random.Generator) -> np.ndarray:
    steps = rng.integers(0, 2, size=length, dtype=np.int64) * 2 - 1
    return np.concatenate(([0], np.cumsum(steps)))


def generate_walk_pair(
    kind: PairKind,
    length: int,
    rng: np.random.Generator,
    *,
    steps_per_unit: int = 1,
    budget: int = DEFAULT_REJECTION_BUDGET,
) -> WalkPair:
    """
    Pair of independent simple random walks of a given length.

    Quadrant-conditioned pairs are drawn by rejection, each coordinate separately
    until it stays nonnegative.

    Raises:
        RejectionBudgetExceeded: More than `budget` attempts were needed.
    """
    kind = PairKind(kind)
    if length < 1:
        raise ValueError("Walk length must be positive!")
    if kind is PairKind.FREE:
        return WalkPair(
            left=_simple_walk(length, rng),
            right=_simple_walk(length, rng),
            kind=kind,
            steps_per_unit=steps_per_unit,
        )
    if kind is not PairKind.QUADRANT_CONDITIONED:
        raise ValueError(f"Cannot generate {kind.value} pairs!")

    attempts = 0
    coordinates = []
    while len(coordinates) < 2:
        attempts += 1
        if attempts > budget:
            raise RejectionBudgetExceeded(
                f"No nonnegative walk of length {length} in {budget} attempts!"
            )
        values = _simple_walk(length, rng)
        if values.min() >= 0:
            coordinates.append(values)
    LOGGER.debug(
        "Quadrant pair of length %d: acceptance rate %.4f.", length, 2 / attempts
    )
    return WalkPair(
        left=coordinates[0],
        right=coordinates[1],
        kind=kind,
        steps_per_unit=steps_per_unit,
    )


def from_lattice_walk(walk: LatticeWalk) -> WalkPair:
    """The coordinates of a lattice walk; only one of them moves at each step."""
    left, right = walk.coordinates()
    kind = PairKind.MULLIN
    if walk.kind is WalkKind.QUADRANT_MEANDER:
        kind = PairKind.QUADRANT_CONDITIONED
    return WalkPair(left=left, right=right, kind=kind)


def ball_growth_series(graph, center: int, r_max: int) -> List[Tuple[int, int]]:
    """(r, size of the ball of radius r around center) for r = 0..r_max."""
    if r_max < 1:
        raise ValueError("Radius must be positive!")
    sizes = np.cumsum(bfs_layers(graph, center, r_max))
    return [(radius, int(size)) for radius, size in enumerate(sizes)]


def format_graph(graph: MatedCrtGraph) -> str:
    """Edge list text with LOWER and UPPER boundary trailers."""
    lines = [f"MCRT {graph.n} {graph.cell_size}"]
    lines.extend(f"{first} {second}" for first, second in sorted(graph.edges))
    lines.append("LOWER " + " ".join(str(cell) for cell in sorted(graph.lower)))
    lines.append("UPPER " + " ".join(str(cell) for cell in sorted(graph.upper)))
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> MatedCrtGraph:
    """Reads the output of format_graph()."""
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or lines[0][0] != "MCRT" or len(lines[0]) != 3:
        raise ValueError("Missing MCRT header!")
    n, cell_size = int(lines[0][1]), int(lines[0][2])
    edges, lower, upper = set(), frozenset(), frozenset()
    for fields in lines[1:]:
        match fields[0]:
            case "LOWER":
                lower = frozenset(int(cell) for cell in fields[1:])
            case "UPPER":
                upper = frozenset(int(cell) for cell in fields[1:])
            case _:
                first, second = sorted(int(cell) for cell in fields)
                edges.add((first, second))
    return MatedCrtGraph(
        n=n, cell_size=cell_size, edges=frozenset(edges), lower=lower, upper=upper
    )
