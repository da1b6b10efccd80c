"""Mutable simulation state, scheduling, and hazard effects."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .arena import EMPTY_REGION, ArenaSpec, Position, Region
from .errors import ValidationError
from .perception import SensingModel
from .policies import PolicySpec
from .rng import SplitMix64

PREDATOR = "predator"
PREY = "prey"
ROLES = (PREDATOR, PREY)

ACTIVE = "active"
SLOWED = "slowed"
REMOVED = "removed"

SYNCHRONOUS = "synchronous"
TURN_TAKING = "turn_taking"
ASYNCHRONOUS = "asynchronous"


@dataclass(eq=False)
class AgentState:
    id: int
    role: str
    pos: Position
    base_speed: float = 1.0
    sensing: SensingModel = field(default_factory=SensingModel)
    policy: PolicySpec = field(default_factory=lambda: PolicySpec("stationary"))
    move_credit: float = 0.0
    status: str = ACTIVE
    slow_factor: float = 1.0
    slow_until: Optional[int] = None  # None while slowed means permanent
    heading: Tuple[float, float] = (1.0, 0.0)
    captured: bool = False
    # Per-episode sensing radius when the sensing model draws one.
    vision_radius: Optional[float] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"agent {self.id}: role must be 'predator' or 'prey', got {self.role!r}")
        if not self.base_speed > 0:
            raise ValidationError(f"agent {self.id}: speed must be > 0, got {self.base_speed}")

    @property
    def removed(self) -> bool:
        return self.status == REMOVED

    @property
    def is_predator(self) -> bool:
        return self.role == PREDATOR

    def status_key(self) -> tuple:
        return (self.status, self.slow_factor, self.slow_until)


@dataclass(frozen=True)
class InjuryPatch:
    region: Region
    factor: float
    duration: Optional[int]  # None = permanent
    roles: frozenset = frozenset(ROLES)

    def __post_init__(self):
        if not (0 < self.factor <= 1):
            raise ValidationError(f"patch factor must be in (0, 1], got {self.factor}")
        if self.duration is not None and self.duration < 1:
            raise ValidationError(f"patch duration must be >= 1 tick or 'permanent', got {self.duration}")


@dataclass(frozen=True)
class HazardField:
    barriers: Region = EMPTY_REGION
    patches: Tuple[InjuryPatch, ...] = ()
    lethal: Tuple[Region, ...] = ()

    def is_lethal(self, pos) -> bool:
        return any(pos in zone for zone in self.lethal)

    @property
    def empty(self) -> bool:
        return not self.barriers and not self.patches and not self.lethal


@dataclass(frozen=True)
class ScheduleSpec:
    mode: str = SYNCHRONOUS
    order: Tuple[int, ...] = ()
    periods: Tuple[Tuple[int, int], ...] = ()  # (agent id, period) pairs

    def __post_init__(self):
        if self.mode not in (SYNCHRONOUS, TURN_TAKING, ASYNCHRONOUS):
            raise ValidationError(f"schedule.mode: unknown mode {self.mode!r}")
        if any(p < 1 for _, p in self.periods):
            raise ValidationError("schedule.periods: periods must be >= 1")

    def period_of(self, agent_id: int) -> int:
        for aid, p in self.periods:
            if aid == agent_id:
                return p
        return 1


@dataclass(frozen=True)
class HazardEvent:
    type: str  # "removed" | "slowed" | "recovered"
    agent: int
    tick: int


@dataclass(eq=False)
class WorldState:
    arena: ArenaSpec
    agents: List[AgentState]
    hazards: HazardField = field(default_factory=HazardField)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    tick: int = 0
    # agent id -> generator; the spawn stream is not kept after initialization
    rngs: Dict[int, SplitMix64] = field(default_factory=dict)

    def __post_init__(self):
        self.by_id = {a.id: a for a in self.agents}

    def agent(self, agent_id: int) -> AgentState:
        return self.by_id[agent_id]

    def live_agents(self):
        return [a for a in self.agents if a.status != REMOVED]

    def occupancy(self) -> Dict[Position, int]:
        return {a.pos: a.id for a in self.agents if a.status != REMOVED}


def agents_due(world: WorldState) -> List[int]:
    """Ids of the agents that act this tick, in id order."""
    live = sorted(a.id for a in world.agents if a.status != REMOVED)
    mode = world.schedule.mode
    if mode == SYNCHRONOUS:
        return live
    if mode == TURN_TAKING:
        alive = set(live)
        order = [aid for aid in world.schedule.order if aid in alive]
        if not order:
            return []
        return [order[world.tick % len(order)]]
    return [aid for aid in live if world.tick % world.schedule.period_of(aid) == 0]


def effective_speed(agent: AgentState) -> float:
    if agent.status == REMOVED:
        return 0.0
    if agent.status == SLOWED:
        return agent.base_speed * agent.slow_factor
    return agent.base_speed


def _severity(status: str, factor: float, until: Optional[int]) -> tuple:
    # removed > permanent slow > longer temporary slow; equal duration -> smaller factor
    if status == REMOVED:
        return (3, 0, 0.0)
    if status == SLOWED:
        if until is None:
            return (2, 0, -factor)
        return (1, until, -factor)
    return (0, 0, 0.0)


def apply_hazards(world: WorldState):
    """Apply lethal zones and injury patches to every live agent.

    Returns ``(world, events)``; the world is updated in place. Effects are
    re-triggered every tick an agent stands in a region.
    """
    events = []
    tick = world.tick
    hz = world.hazards
    for agent in world.agents:
        if agent.status == REMOVED:
            continue
        before = agent.status_key()
        if agent.status == SLOWED and agent.slow_until is not None and agent.slow_until <= tick:
            agent.status, agent.slow_factor, agent.slow_until = ACTIVE, 1.0, None
        if hz.is_lethal(agent.pos):
            agent.status = REMOVED
            events.append(HazardEvent("removed", agent.id, tick))
            continue
        best = (agent.status, agent.slow_factor, agent.slow_until)
        for patch in hz.patches:
            if agent.role not in patch.roles or agent.pos not in patch.region:
                continue
            until = None if patch.duration is None else tick + patch.duration
            cand = (SLOWED, patch.factor, until)
            if _severity(*cand) > _severity(*best):
                best = cand
        agent.status, agent.slow_factor, agent.slow_until = best
        after = agent.status_key()
        if after != before:
            kind = "slowed" if agent.status == SLOWED else "recovered"
            events.append(HazardEvent(kind, agent.id, tick))
    return world, events


def schedule_window(world: WorldState) -> int:
    """Ticks after which every live agent has been due at least once."""
    sched = world.schedule
    n = len(world.agents)
    if sched.mode == ASYNCHRONOUS:
        return math.lcm(*(sched.period_of(a.id) for a in world.agents)) * n
    return max(n, 1)
