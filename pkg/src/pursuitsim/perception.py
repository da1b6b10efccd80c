"""Sensing models and per-agent observations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple

from .arena import ArenaSpec, Position, _segment_hits_rect, distance, signed_delta
from .errors import ObserverRemoved, ValidationError

if TYPE_CHECKING:
    from .world import HazardField, WorldState

OMNISCIENT = "omniscient"
RADIUS = "radius"
LINE_OF_SIGHT = "line_of_sight"
FOV = "fov"
SENSING_MODES = (OMNISCIENT, RADIUS, LINE_OF_SIGHT, FOV)


@dataclass(frozen=True)
class SensingModel:
    """How far and in which directions an agent perceives others.

    ``r_range`` (radius mode only) draws the radius once per episode from
    ``[lo, hi]``. ``detection_range`` maps a target role to a range that
    replaces the model's own range for targets of that role.
    """

    mode: str = OMNISCIENT
    r: float = 0.0
    r_range: Optional[Tuple[float, float]] = None
    angle: float = 360.0
    range: float = math.inf
    detection_range: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.mode not in SENSING_MODES:
            raise ValidationError(f"sensing.mode: unknown mode {self.mode!r}")
        if self.r < 0:
            raise ValidationError(f"sensing.r: must be >= 0, got {self.r}")
        if self.r_range is not None and not (0 <= self.r_range[0] <= self.r_range[1]):
            raise ValidationError(f"sensing.r_range: need 0 <= lo <= hi, got {list(self.r_range)}")
        if not (0 < self.angle <= 360):
            raise ValidationError(f"sensing.angle: must be in (0, 360], got {self.angle}")
        if self.range < 0:
            raise ValidationError(f"sensing.range: must be >= 0, got {self.range}")
        for role, rng in self.detection_range:
            if rng < 0:
                raise ValidationError(f"sensing.detection_range.{role}: must be >= 0")

    def range_for(self, role: str, own_radius: Optional[float] = None) -> float:
        for r_role, rng in self.detection_range:
            if r_role == role:
                return rng
        if self.mode == RADIUS:
            return self.r if own_radius is None else own_radius
        if self.mode == FOV:
            return self.range
        return math.inf


class Seen(NamedTuple):
    id: int
    role: str
    pos: Position
    captured: bool


@dataclass(frozen=True)
class Observation:
    id: int
    role: str
    pos: Position
    status: str
    heading: Tuple[float, float]
    speed: float
    arena: ArenaSpec
    visible: Tuple[Seen, ...]
    tick: int


def supercover(a: Position, b: Position) -> list:
    """Every grid cell touched by the segment between two cell centres.

    Where the segment passes exactly through a cell corner both side cells
    are included, so the result is symmetric in ``a`` and ``b``.
    """
    x, y = a
    dx = b[0] - x
    dy = b[1] - y
    nx, ny = abs(dx), abs(dy)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    cells = [(x, y)]
    ix = iy = 0
    while ix < nx or iy < ny:
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            cells.append((x + sx, y))
            cells.append((x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        cells.append((x, y))
    return cells


def _wrapped_target(a: Position, b: Position, arena: ArenaSpec) -> Position:
    return (
        a[0] + signed_delta(a[0], b[0], arena.width, arena.toroidal),
        a[1] + signed_delta(a[1], b[1], arena.height, arena.toroidal),
    )


def has_line_of_sight(a: Position, b: Position, hazards: "HazardField", arena: ArenaSpec) -> bool:
    barriers = hazards.barriers
    if not barriers:
        return True
    if b < a:
        a, b = b, a  # same segment either way round, including wrap ties
    end = _wrapped_target(a, b, arena)
    if arena.discrete:
        w, h = arena.width, arena.height
        blocked = barriers.cells
        path = supercover(a, end)
        if arena.toroidal:
            return not any((x % w, y % h) in blocked for x, y in path[1:-1])
        return not any(c in blocked for c in path[1:-1])
    shifts = [(0.0, 0.0)]
    if arena.toroidal:
        shifts = [(i * arena.width, j * arena.height) for i in (-1, 0, 1) for j in (-1, 0, 1)]
    for x0, y0, x1, y1 in barriers.rects:
        for sx, sy in shifts:
            if _segment_hits_rect(a[0], a[1], end[0], end[1], (x0 + sx, y0 + sy, x1 + sx, y1 + sy), open_ends=True):
                return False
    return True


def _within_fov(observer, target_pos: Position, arena: ArenaSpec, angle: float) -> bool:
    if angle >= 360:
        return True
    vx = signed_delta(observer.pos[0], target_pos[0], arena.width, arena.toroidal)
    vy = signed_delta(observer.pos[1], target_pos[1], arena.height, arena.toroidal)
    norm = math.hypot(vx, vy)
    if norm == 0:
        return True
    hx, hy = observer.heading
    cos = (vx * hx + vy * hy) / (norm * math.hypot(hx, hy))
    off = math.degrees(math.acos(max(-1.0, min(1.0, cos))))
    return off <= angle / 2 + 1e-9


def can_see(world: "WorldState", observer, target) -> bool:
    model = observer.sensing
    arena = world.arena
    limit = model.range_for(target.role, observer.vision_radius)
    if limit != math.inf and distance(observer.pos, target.pos, arena) > limit:
        return False
    if model.mode == FOV and not _within_fov(observer, target.pos, arena, model.angle):
        return False
    if model.mode in (LINE_OF_SIGHT, FOV):
        return has_line_of_sight(observer.pos, target.pos, world.hazards, arena)
    return True


def observe(world: "WorldState", observer_id: int, speed: Optional[float] = None) -> Observation:
    me = world.by_id[observer_id]
    if me.status == "removed":
        raise ObserverRemoved(f"agent {observer_id} is removed and cannot observe")
    omniscient = me.sensing.mode == OMNISCIENT and not me.sensing.detection_range
    visible = []
    for other in world.agents:
        if other is me or other.status == "removed":
            continue
        if omniscient or can_see(world, me, other):
            visible.append(Seen(other.id, other.role, other.pos, other.captured))
    if speed is None:
        from .world import effective_speed

        speed = effective_speed(me)
    return Observation(me.id, me.role, me.pos, me.status, me.heading, speed, world.arena, tuple(visible), world.tick)
