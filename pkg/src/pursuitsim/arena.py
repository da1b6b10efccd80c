"""Arena geometry: topology, metrics and legal grid moves.

Discrete positions are ``(int, int)`` tuples, continuous positions are
``(float, float)`` tuples. Both live in the half-open box
``[0, width) x [0, height)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Tuple

from .errors import OutOfBounds, ValidationError

Position = Tuple[float, float]
Rect = Tuple[float, float, float, float]

DISCRETE = "discrete"
CONTINUOUS = "continuous"
BOUNDED = "bounded"
TOROIDAL = "toroidal"


class Action(IntEnum):
    """Grid moves. The integer value is the fixed tie-break order."""

    STAY = 0
    UP = 1
    DOWN = 2
    LEFT = 3
    RIGHT = 4
    UP_LEFT = 5
    UP_RIGHT = 6
    DOWN_LEFT = 7
    DOWN_RIGHT = 8


# +y is "up".
DELTAS = {
    Action.STAY: (0, 0),
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.UP_LEFT: (-1, 1),
    Action.UP_RIGHT: (1, 1),
    Action.DOWN_LEFT: (-1, -1),
    Action.DOWN_RIGHT: (1, -1),
}
ORTHOGONAL_ACTIONS = tuple(Action)[:5]
ALL_ACTIONS = tuple(Action)
ORTHOGONAL_OFFSETS = ((0, 1), (0, -1), (-1, 0), (1, 0))


@dataclass(frozen=True)
class ArenaSpec:
    kind: str = DISCRETE
    width: float = 10
    height: float = 10
    topology: str = BOUNDED
    allow_diagonal: bool = False

    def __post_init__(self):
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise ValidationError(f"arena.kind: expected 'discrete' or 'continuous', got {self.kind!r}")
        if self.topology not in (BOUNDED, TOROIDAL):
            raise ValidationError(f"arena.topology: expected 'bounded' or 'toroidal', got {self.topology!r}")
        if not (self.width >= 1 and self.height >= 1):
            raise ValidationError(f"arena.width/height: must be >= 1, got {self.width}x{self.height}")
        if self.kind == DISCRETE:
            if int(self.width) != self.width or int(self.height) != self.height:
                raise ValidationError("arena.width/height: discrete arenas need integer extents")
            object.__setattr__(self, "width", int(self.width))
            object.__setattr__(self, "height", int(self.height))
        elif self.allow_diagonal:
            raise ValidationError("arena.allow_diagonal: only meaningful for discrete arenas")

    @property
    def discrete(self) -> bool:
        return self.kind == DISCRETE

    @property
    def toroidal(self) -> bool:
        return self.topology == TOROIDAL

    @property
    def actions(self) -> tuple:
        return ALL_ACTIONS if self.allow_diagonal else ORTHOGONAL_ACTIONS

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def cells(self):
        """All grid cells, row-major from y = 0."""
        return [(x, y) for y in range(self.height) for x in range(self.width)]


@dataclass(frozen=True)
class Region:
    """A set of grid cells and/or half-open axis-aligned rectangles."""

    cells: frozenset = field(default_factory=frozenset)
    rects: Tuple[Rect, ...] = ()

    def __contains__(self, pos) -> bool:
        if pos in self.cells:
            return True
        x, y = pos
        for x0, y0, x1, y1 in self.rects:
            if x0 <= x < x1 and y0 <= y < y1:
                return True
        return False

    def __bool__(self) -> bool:
        return bool(self.cells) or bool(self.rects)

    def __or__(self, other: "Region") -> "Region":
        return Region(self.cells | other.cells, self.rects + other.rects)

    @classmethod
    def of_cells(cls, cells: Iterable) -> "Region":
        return cls(cells=frozenset((int(x), int(y)) for x, y in cells))

    @classmethod
    def of_rects(cls, rects: Iterable) -> "Region":
        return cls(rects=tuple(tuple(float(v) for v in r) for r in rects))

    def check_within(self, arena: ArenaSpec, what: str) -> None:
        for c in self.cells:
            if not arena.in_bounds(c):
                raise ValidationError(f"{what}: cell {list(c)} outside {arena.width}x{arena.height} arena")
        for x0, y0, x1, y1 in self.rects:
            if not (0 <= x0 < x1 <= arena.width and 0 <= y0 < y1 <= arena.height):
                raise ValidationError(f"{what}: rectangle {[x0, y0, x1, y1]} not inside arena")


# Barriers are just an impassable region.
ObstacleSet = Region
EMPTY_REGION = Region()


def normalize_position(pos: Position, arena: ArenaSpec) -> Position:
    """Fold ``pos`` into the arena (toroidal) or check it is inside (bounded)."""
    x, y = pos
    if arena.toroidal:
        x = x % arena.width
        y = y % arena.height
        # float modulo of a tiny negative can round up to the extent itself
        if x >= arena.width:
            x = 0.0 * x
        if y >= arena.height:
            y = 0.0 * y
        return (x, y)
    if not (0 <= x < arena.width and 0 <= y < arena.height):
        raise OutOfBounds(f"position {pos} outside bounded {arena.width}x{arena.height} arena")
    return (x, y)


def axis_delta(a: float, b: float, extent: float, toroidal: bool) -> float:
    d = abs(a - b)
    if toroidal:
        return min(d, extent - d)
    return d


def signed_delta(a: float, b: float, extent: float, toroidal: bool) -> float:
    """Displacement from ``a`` to ``b``, the shortest wrap when toroidal."""
    d = b - a
    if toroidal:
        if d > extent / 2:
            d -= extent
        elif d < -extent / 2:
            d += extent
    return d


def distance(a: Position, b: Position, arena: ArenaSpec) -> float:
    """Manhattan (Chebyshev with diagonals) on grids, Euclidean in continuous arenas."""
    dx = axis_delta(a[0], b[0], arena.width, arena.toroidal)
    dy = axis_delta(a[1], b[1], arena.height, arena.toroidal)
    if arena.kind == CONTINUOUS:
        return math.hypot(dx, dy)
    if arena.allow_diagonal:
        return max(dx, dy)
    return dx + dy


def squared_euclidean(a: Position, b: Position, arena: ArenaSpec) -> float:
    dx = axis_delta(a[0], b[0], arena.width, arena.toroidal)
    dy = axis_delta(a[1], b[1], arena.height, arena.toroidal)
    return dx * dx + dy * dy


def step_destination(cell: Position, action: Action, arena: ArenaSpec) -> Optional[Position]:
    """Cell reached by ``action`` or None when it would leave a bounded grid."""
    dx, dy = DELTAS[action]
    x = cell[0] + dx
    y = cell[1] + dy
    if arena.toroidal:
        return (x % arena.width, y % arena.height)
    if 0 <= x < arena.width and 0 <= y < arena.height:
        return (x, y)
    return None


def legal_moves(cell: Position, arena: ArenaSpec, obstacles: Region = EMPTY_REGION, occupied=frozenset()) -> list:
    """Actions from ``cell`` whose destination is free, in tie-break order.

    ``Stay`` is always first. On tiny toroidal grids where two actions reach
    the same cell only the first of them is kept.
    """
    moves = [Action.STAY]
    seen = {cell}
    for action in arena.actions[1:]:
        dest = step_destination(cell, action, arena)
        if dest is None or dest in seen or dest in occupied or dest in obstacles:
            continue
        seen.add(dest)
        moves.append(action)
    return moves


def orthogonal_neighbors(cell: Position, arena: ArenaSpec) -> list:
    """The four side cells of ``cell``; None for sides beyond a bounded wall."""
    return [step_destination(cell, a, arena) for a in ORTHOGONAL_ACTIONS[1:]]


def clamp_continuous(x: float, y: float, arena: ArenaSpec) -> Position:
    if arena.toroidal:
        return normalize_position((x, y), arena)
    top_x = math.nextafter(float(arena.width), 0.0)
    top_y = math.nextafter(float(arena.height), 0.0)
    return (min(max(x, 0.0), top_x), min(max(y, 0.0), top_y))


def _segment_hits_rect(x0, y0, x1, y1, rect, open_ends=False) -> bool:
    """Liang-Barsky test of segment (x0,y0)-(x1,y1) against a closed rectangle."""
    rx0, ry0, rx1, ry1 = rect
    t0, t1 = 0.0, 1.0
    dx, dy = x1 - x0, y1 - y0
    for p, q in ((-dx, x0 - rx0), (dx, rx1 - x0), (-dy, y0 - ry0), (dy, ry1 - y0)):
        if p == 0:
            if q < 0:
                return False
            continue
        r = q / p
        if p < 0:
            if r > t1:
                return False
            t0 = max(t0, r)
        else:
            if r < t0:
                return False
            t1 = min(t1, r)
    if open_ends:
        return t0 < t1 and t1 > 0.0 and t0 < 1.0
    return t0 <= t1


def _axis_move_blocked(fixed: float, a: float, b: float, axis: int, barriers: Region, arena: ArenaSpec) -> bool:
    """Does sweeping coordinate ``axis`` from ``a`` to ``b`` cross a barrier rectangle?"""
    lo, hi = (a, b) if a <= b else (b, a)
    extent = arena.width if axis == 0 else arena.height
    shifts = (0.0, -extent, extent) if arena.toroidal else (0.0,)
    for x0, y0, x1, y1 in barriers.rects:
        f0, f1, m0, m1 = (y0, y1, x0, x1) if axis == 0 else (x0, x1, y0, y1)
        if not (f0 <= fixed < f1):
            continue
        for s in shifts:
            if lo < m1 + s and hi >= m0 + s:
                return True
    return False


def move_continuous(pos: Position, vx: float, vy: float, arena: ArenaSpec, barriers: Region = EMPTY_REGION) -> Position:
    """One Euler step. A blocked axis component is cancelled (axis-separated slide)."""
    x, y = pos
    if barriers.rects:
        nx = x + vx
        if vx != 0.0 and _axis_move_blocked(y, x, nx, 0, barriers, arena):
            nx = x
        ny = y + vy
        if vy != 0.0 and _axis_move_blocked(nx % arena.width if arena.toroidal else nx, y, ny, 1, barriers, arena):
            ny = y
        return clamp_continuous(nx, ny, arena)
    return clamp_continuous(x + vx, y + vy, arena)
