"""Capture predicates and mission outcome rules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, NamedTuple, Optional

from .arena import distance, orthogonal_neighbors
from .errors import ValidationError

SURROUND4 = "surround4"
TAG = "tag"
PROXIMITY = "proximity"

IN_PROGRESS = "in_progress"
SUCCESS = "success"
TIMEOUT = "timeout"
WINDOW_MISSED = "window_missed"


@dataclass(frozen=True)
class CaptureRule:
    mode: str = SURROUND4
    radius: float = 1.0
    epsilon: float = 1.0
    walls_assist: bool = False

    def __post_init__(self):
        if self.mode not in (SURROUND4, TAG, PROXIMITY):
            raise ValidationError(f"rules.capture: unknown capture mode {self.mode!r}")
        if self.mode == TAG and not self.radius > 0:
            raise ValidationError(f"rules.tag_radius: must be > 0, got {self.radius}")
        if self.mode == PROXIMITY and not self.epsilon > 0:
            raise ValidationError(f"rules.epsilon: must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class MissionSpec:
    required_prey: FrozenSet[int]
    decoy_prey: FrozenSet[int] = frozenset()
    window_ticks: Optional[int] = None
    t_max: Optional[int] = None  # None: scenario default

    def __post_init__(self):
        if not self.required_prey:
            raise ValidationError("mission.required: at least one required prey")
        if self.required_prey & self.decoy_prey:
            overlap = sorted(self.required_prey & self.decoy_prey)
            raise ValidationError(f"mission.decoys: prey {overlap} both required and decoy")
        if self.t_max is not None and self.t_max < 1:
            raise ValidationError(f"rules.t_max: must be >= 1, got {self.t_max}")
        if self.window_ticks is not None:
            if self.window_ticks < 1:
                raise ValidationError(f"mission.window: must be >= 1, got {self.window_ticks}")
            if self.t_max is not None and self.window_ticks > self.t_max:
                raise ValidationError(f"mission.window: {self.window_ticks} exceeds t_max {self.t_max}")


class MissionStatus(NamedTuple):
    state: str
    tick: Optional[int] = None

    @property
    def terminal(self) -> bool:
        return self.state != IN_PROGRESS


@dataclass
class EpisodeOutcome:
    result: str
    capture_ticks: Dict[int, int] = field(default_factory=dict)
    final_tick: int = 0
    removed_agents: List[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "result": self.result,
            "capture_ticks": {str(k): v for k, v in sorted(self.capture_ticks.items())},
            "final_tick": self.final_tick,
            "removed_agents": list(self.removed_agents),
        }


def is_surround_captured(world, prey_id: int, walls_assist: bool = False) -> bool:
    """Four distinct live predators occupy the prey's four side cells.

    With ``walls_assist`` a side beyond a bounded wall or on a barrier counts
    as blocked, as long as at least one predator takes part.
    """
    prey = world.by_id[prey_id]
    occ = world.occupancy()
    by_id = world.by_id
    barriers = world.hazards.barriers
    sides = orthogonal_neighbors(prey.pos, world.arena)
    predators = set()
    blocked = 0
    for cell in sides:
        if cell is None or cell == prey.pos:
            if not walls_assist or cell == prey.pos:
                return False
            blocked += 1
            continue
        occupant = occ.get(cell)
        if occupant is not None and by_id[occupant].role == "predator":
            predators.add(occupant)
        elif walls_assist and cell in barriers:
            blocked += 1
        else:
            return False
    if walls_assist:
        return len(predators) >= 1 and len(predators) + blocked == 4
    return len(predators) == 4


def capturing_predator(world, prey_id: int, rule: CaptureRule) -> Optional[int]:
    """Lowest-id live predator within the tag/proximity threshold, if any."""
    prey = world.by_id[prey_id]
    arena = world.arena
    for agent in world.agents:
        if agent.role != "predator" or agent.status == "removed":
            continue
        d = distance(agent.pos, prey.pos, arena)
        if (rule.mode == PROXIMITY and d < rule.epsilon) or (rule.mode != PROXIMITY and d <= rule.radius):
            return agent.id
    return None


def is_tag_captured(world, prey_id: int, rule: CaptureRule) -> bool:
    """Any live predator within ``radius`` (closed) or ``epsilon`` (open)."""
    return capturing_predator(world, prey_id, rule) is not None


def is_captured(world, prey_id: int, rule: CaptureRule) -> bool:
    if rule.mode == SURROUND4:
        return is_surround_captured(world, prey_id, rule.walls_assist)
    return is_tag_captured(world, prey_id, rule)


def mission_status(capture_ticks: Dict[int, int], mission: MissionSpec, tick: int, t_max: Optional[int] = None,
                   removed=frozenset()) -> MissionStatus:
    """Classify the mission at ``tick``.

    ``window_missed`` becomes terminal early only once every required prey is
    captured; otherwise the episode runs on to ``t_max``. If a required prey
    was removed the mission can only time out.
    """
    t_max = mission.t_max if t_max is None else t_max
    window = mission.window_ticks
    required = mission.required_prey
    if all(p in capture_ticks for p in required):
        done = max(capture_ticks[p] for p in required)
        if window is None or done <= window:
            return MissionStatus(SUCCESS, done)
        return MissionStatus(WINDOW_MISSED, done)
    if t_max is not None and tick >= t_max:
        if window is not None and tick > window and not (required & frozenset(removed)):
            return MissionStatus(WINDOW_MISSED, tick)
        return MissionStatus(TIMEOUT, tick)
    return MissionStatus(IN_PROGRESS)
