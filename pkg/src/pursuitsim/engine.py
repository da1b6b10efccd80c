"""Deterministic per-tick simulation loop and episode runner.

A tick runs these phases in order:

1. pick the agents due under the schedule;
2. due agents bank move credit, observe, and decide; discrete agents take one
   sub-step per whole unit of credit, each sub-step a simultaneous round;
3. grid moves are resolved in ascending id order, then the tick advances;
4. hazards apply to every live agent;
5. capture predicates run for every live, uncaptured prey.

Captures and hazard effects are stamped with the tick of the state they are
observed in, so a capture found after the first step is at tick 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .arena import CONTINUOUS, DELTAS, DISCRETE, Action, ArenaSpec, Position, legal_moves, move_continuous, step_destination
from .capture import (
    SURROUND4,
    CaptureRule,
    EpisodeOutcome,
    MissionSpec,
    capturing_predator,
    is_surround_captured,
    mission_status,
)
from .errors import InvariantViolation, ScenarioInvalid
from .perception import RADIUS, SensingModel, observe
from .policies import PolicySpec, decide
from .rng import SPAWN_TAG, VISION_TAG, SplitMix64, agent_stream_tag, derive_seed
from .world import (
    PREDATOR,
    PREY,
    REMOVED,
    AgentState,
    HazardField,
    ScheduleSpec,
    WorldState,
    agents_due,
    apply_hazards,
    effective_speed,
)

CREDIT_EPS = 1e-9
MAX_SPAWN_ATTEMPTS = 100


@dataclass(frozen=True)
class AgentSpec:
    """Initial configuration of one agent. ``start=None`` means a random free cell."""

    id: int
    role: str
    start: Optional[Position] = None
    speed: float = 1.0
    policy: PolicySpec = PolicySpec("stationary")
    sensing: SensingModel = SensingModel()


@dataclass(frozen=True)
class Event:
    type: str  # capture | removed | slowed | recovered
    tick: int
    agent: Optional[int] = None
    prey: Optional[int] = None

    def to_dict(self) -> dict:
        return {"type": self.type, "agent": self.agent, "prey": self.prey, "tick": self.tick}


@dataclass(frozen=True)
class Scenario:
    arena: ArenaSpec
    agents: Tuple[AgentSpec, ...]
    capture: CaptureRule
    mission: MissionSpec
    hazards: HazardField = HazardField()
    schedule: ScheduleSpec = ScheduleSpec()

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(sorted(self.agents, key=lambda a: a.id)))
        validate_scenario(self)

    @property
    def t_max(self) -> int:
        if self.mission.t_max is not None:
            return self.mission.t_max
        return int(math.ceil(4 * (self.arena.width + self.arena.height)))

    @property
    def prey_ids(self) -> List[int]:
        return [a.id for a in self.agents if a.role == PREY]

    @property
    def predator_ids(self) -> List[int]:
        return [a.id for a in self.agents if a.role == PREDATOR]


@dataclass(frozen=True)
class TickSnapshot:
    tick: int
    agents: Tuple[Tuple[int, str, float, float, str], ...]
    events: Tuple[Event, ...]


@dataclass
class EpisodeRecord:
    outcome: EpisodeOutcome
    seed: int
    trajectory: Optional[List[TickSnapshot]] = None
    event_log: List[Event] = field(default_factory=list)


def validate_scenario(sc: Scenario) -> None:
    arena = sc.arena
    ids = [a.id for a in sc.agents]
    if len(set(ids)) != len(ids):
        raise ScenarioInvalid(f"agents: duplicate agent id in {ids}")
    roles = {a.role for a in sc.agents}
    if PREDATOR not in roles or PREY not in roles:
        raise ScenarioInvalid("agents: need at least one predator and one prey")
    sc.hazards.barriers.check_within(arena, "hazards.barriers")
    for zone in sc.hazards.lethal:
        zone.check_within(arena, "hazards.lethal")
    for patch in sc.hazards.patches:
        patch.region.check_within(arena, "hazards.patches.region")
    starts = set()
    for a in sc.agents:
        if a.role not in (PREDATOR, PREY):
            raise ScenarioInvalid(f"agents[{a.id}].role: unknown role {a.role!r}")
        if not a.speed > 0:
            raise ScenarioInvalid(f"agents[{a.id}].speed: must be > 0, got {a.speed}")
        a.policy.check_role(a.role, f"agents[{a.id}].policy")
        if a.start is None:
            continue
        if not arena.in_bounds(a.start):
            raise ScenarioInvalid(f"agents[{a.id}].start: {list(a.start)} outside arena")
        if arena.kind == DISCRETE:
            if any(int(v) != v for v in a.start):
                raise ScenarioInvalid(f"agents[{a.id}].start: discrete start must be integer")
            if a.start in starts:
                raise ScenarioInvalid(f"agents[{a.id}].start: {list(a.start)} shared with another agent")
            starts.add(a.start)
        if a.start in sc.hazards.barriers:
            raise ScenarioInvalid(f"agents[{a.id}].start: {list(a.start)} inside a barrier")
        if sc.hazards.is_lethal(a.start):
            raise ScenarioInvalid(f"agents[{a.id}].start: {list(a.start)} inside a lethal zone")
    prey = set(sc.prey_ids)
    m = sc.mission
    for key, group in (("mission.required", m.required_prey), ("mission.decoys", m.decoy_prey)):
        stray = sorted(set(group) - prey)
        if stray:
            raise ScenarioInvalid(f"{key}: ids {stray} are not prey agents")
    if sc.capture.mode == SURROUND4 and arena.kind != DISCRETE:
        raise ScenarioInvalid("rules.capture: surround4 needs a discrete arena")
    if m.window_ticks is not None and m.window_ticks > sc.t_max:
        raise ScenarioInvalid(f"mission.window: {m.window_ticks} exceeds t_max {sc.t_max}")
    sched = sc.schedule
    if sched.mode == "turn_taking" and sorted(sched.order) != sorted(ids):
        raise ScenarioInvalid(f"schedule.order: must be a permutation of agent ids {sorted(ids)}")
    for aid, _ in sched.periods:
        if aid not in ids:
            raise ScenarioInvalid(f"schedule.periods: unknown agent id {aid}")
    if arena.kind == CONTINUOUS:
        for what, region in [("hazards.barriers", sc.hazards.barriers)] + [("hazards.lethal", z) for z in sc.hazards.lethal]:
            if region.cells:
                raise ScenarioInvalid(f"{what}: continuous arenas take rectangles, not cells")
    elif sc.hazards.barriers.rects:
        raise ScenarioInvalid("hazards.barriers: discrete arenas take cells, not rectangles")


# ---------------------------------------------------------------- setup

def _free_cells(sc: Scenario, taken: set) -> list:
    hz = sc.hazards
    patched = set()
    for p in hz.patches:
        patched |= p.region.cells
    return [
        c for c in sc.arena.cells()
        if c not in taken and c not in hz.barriers and not hz.is_lethal(c) and c not in patched
    ]


def _draw_continuous(sc: Scenario, rng: SplitMix64) -> Position:
    hz = sc.hazards
    for _ in range(1000):
        p = (rng.random() * sc.arena.width, rng.random() * sc.arena.height)
        if p not in hz.barriers and not hz.is_lethal(p) and not any(p in patch.region for patch in hz.patches):
            return p
    raise ScenarioInvalid("agents.start: no hazard-free spawn point found")


def _draw_starts(sc: Scenario, rng: SplitMix64) -> Dict[int, Position]:
    starts = {a.id: a.start for a in sc.agents if a.start is not None}
    random_ids = [a.id for a in sc.agents if a.start is None]
    if not random_ids:
        return starts
    if sc.arena.kind == DISCRETE:
        free = _free_cells(sc, set(starts.values()))
        if len(free) < len(random_ids):
            raise ScenarioInvalid(f"agents.start: {len(random_ids)} random starts but only {len(free)} free cells")
        for aid in random_ids:
            starts[aid] = free.pop(rng.below(len(free)))
    else:
        for aid in random_ids:
            starts[aid] = _draw_continuous(sc, rng)
    return starts


def _make_world(sc: Scenario, seed: int, starts: Dict[int, Position]) -> WorldState:
    agents = []
    rngs = {}
    vision = SplitMix64(derive_seed(seed, VISION_TAG))
    for spec in sc.agents:
        pos = starts[spec.id]
        if sc.arena.kind == DISCRETE:
            pos = (int(pos[0]), int(pos[1]))
        else:
            pos = (float(pos[0]), float(pos[1]))
        agent = AgentState(spec.id, spec.role, pos, spec.speed, spec.sensing, spec.policy)
        if spec.sensing.mode == RADIUS and spec.sensing.r_range is not None:
            agent.vision_radius = vision.uniform(*spec.sensing.r_range)
        agents.append(agent)
        rngs[spec.id] = SplitMix64(derive_seed(seed, agent_stream_tag(spec.id, spec.policy.salt)))
    return WorldState(sc.arena, agents, sc.hazards, sc.schedule, 0, rngs)


def _check_captures(world: WorldState, sc: Scenario, capture_ticks: Dict[int, int]) -> List[Event]:
    events = []
    rule = sc.capture
    for agent in world.agents:
        if agent.role != PREY or agent.status == REMOVED or agent.captured:
            continue
        if rule.mode == SURROUND4:
            hit = is_surround_captured(world, agent.id, rule.walls_assist)
            by = None
        else:
            by = capturing_predator(world, agent.id, rule)
            hit = by is not None
        if hit:
            agent.captured = True
            capture_ticks[agent.id] = world.tick
            events.append(Event("capture", world.tick, by, agent.id))
    return events


def _involves(world: WorldState, sc: Scenario, ev: Event, random_ids: set) -> bool:
    # Random spawns avoid hazards, so only captures can involve them.
    if ev.prey in random_ids or ev.agent in random_ids:
        return True
    if sc.capture.mode == SURROUND4:
        occ = world.occupancy()
        prey_pos = world.by_id[ev.prey].pos
        return any(
            occ.get(step_destination(prey_pos, a, world.arena)) in random_ids
            for a in (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)
        )
    return False


def initial_world(sc: Scenario, seed: int):
    """World at tick 0 plus the events (hazards, captures) seen at initialisation."""
    spawn = SplitMix64(derive_seed(seed, SPAWN_TAG))
    random_ids = {a.id for a in sc.agents if a.start is None}
    for _ in range(MAX_SPAWN_ATTEMPTS):
        world = _make_world(sc, seed, _draw_starts(sc, spawn))
        capture_ticks: Dict[int, int] = {}
        _, hz_events = apply_hazards(world)
        events = [Event(e.type, e.tick, e.agent, None) for e in hz_events]
        captures = _check_captures(world, sc, capture_ticks)
        if not any(_involves(world, sc, ev, random_ids) for ev in captures):
            return world, capture_ticks, events + captures
    raise ScenarioInvalid(
        f"agents.start: random spawn overlapped a capture or hazard {MAX_SPAWN_ATTEMPTS} times in a row"
    )


# ---------------------------------------------------------------- stepping

def resolve_move_conflicts(proposals: Dict[int, Position], occupancy: Dict[int, Position]) -> Dict[int, Position]:
    """Grant grid moves in ascending id order.

    ``occupancy`` maps every live agent id to its current cell. A move is
    granted when its target is free after the moves already granted; denied
    movers stay put. Swaps and cycles therefore never go through.
    """
    current = dict(occupancy)
    taken = set(current.values())
    final = {}
    for aid in sorted(proposals):
        target = proposals[aid]
        here = current[aid]
        if target == here or target in taken:
            final[aid] = here
            continue
        taken.discard(here)
        taken.add(target)
        current[aid] = target
        final[aid] = target
    return final


def _discrete_round(world: WorldState, movers: List[int]) -> None:
    arena = world.arena
    barriers = world.hazards.barriers
    by_id = world.by_id
    occupancy = {a.id: a.pos for a in world.agents if a.status != REMOVED}
    taken = set(occupancy.values())
    proposals = {}
    directions = {}
    for aid in movers:
        agent = by_id[aid]
        legal = legal_moves(agent.pos, arena, barriers, taken)
        obs = observe(world, aid)
        action = decide(agent.policy, obs, legal, world.rngs[aid])
        if action != Action.STAY:
            proposals[aid] = step_destination(agent.pos, action, arena)
            directions[aid] = action
    if not proposals:
        return
    for aid, dest in resolve_move_conflicts(proposals, occupancy).items():
        agent = by_id[aid]
        if dest != agent.pos:
            agent.pos = dest
            dx, dy = DELTAS[directions[aid]]
            agent.heading = (float(dx), float(dy))


def _continuous_moves(world: WorldState, due: List[int]) -> None:
    arena = world.arena
    barriers = world.hazards.barriers
    by_id = world.by_id
    moves = []
    for aid in due:
        agent = by_id[aid]
        speed = effective_speed(agent)
        obs = observe(world, aid, speed)
        vx, vy = decide(agent.policy, obs, None, world.rngs[aid])
        mag = math.hypot(vx, vy)
        if mag > speed > 0:
            vx, vy = vx / mag * speed, vy / mag * speed
        moves.append((agent, vx, vy))
    for agent, vx, vy in moves:
        if vx == 0.0 and vy == 0.0:
            continue
        agent.pos = move_continuous(agent.pos, vx, vy, arena, barriers)
        mag = math.hypot(vx, vy)
        agent.heading = (vx / mag, vy / mag)


def _check_invariants(world: WorldState) -> None:
    arena = world.arena
    live = [a for a in world.agents if a.status != REMOVED]
    for a in live:
        if not arena.in_bounds(a.pos):
            raise InvariantViolation(f"tick {world.tick}: agent {a.id} at {a.pos} outside arena")
        if a.pos in world.hazards.barriers:
            raise InvariantViolation(f"tick {world.tick}: agent {a.id} inside barrier at {a.pos}")
    if arena.kind == DISCRETE and len({a.pos for a in live}) != len(live):
        raise InvariantViolation(f"tick {world.tick}: two live agents share a cell")


def step(world: WorldState, scenario: Scenario, capture_ticks: Optional[Dict[int, int]] = None):
    """Advance ``world`` by one tick in place. Returns ``(world, events)``."""
    if capture_ticks is None:
        capture_ticks = {a.id: world.tick for a in world.agents if a.captured}
    due = [
        aid for aid in agents_due(world)
        if not (world.by_id[aid].role == PREY and world.by_id[aid].captured)
    ]
    if world.arena.kind == DISCRETE:
        steps = {}
        for aid in due:
            agent = world.by_id[aid]
            credit = agent.move_credit + effective_speed(agent)
            whole = int(math.floor(credit + CREDIT_EPS))
            agent.move_credit = max(0.0, credit - whole)
            if whole:
                steps[aid] = whole
        for r in range(max(steps.values(), default=0)):
            _discrete_round(world, [aid for aid in due if steps.get(aid, 0) > r])
    else:
        _continuous_moves(world, due)
    world.tick += 1
    _, hz_events = apply_hazards(world)
    events = [Event(e.type, e.tick, e.agent, None) for e in hz_events]
    events += _check_captures(world, scenario, capture_ticks)
    _check_invariants(world)
    return world, events


def snapshot(world: WorldState, events) -> TickSnapshot:
    return TickSnapshot(
        world.tick,
        tuple((a.id, a.role, a.pos[0], a.pos[1], a.status) for a in world.agents),
        tuple(events),
    )


def _removed_ids(world: WorldState) -> List[int]:
    return [a.id for a in world.agents if a.status == REMOVED]


def run_episode_python(scenario: Scenario, seed: int, record_trajectory: bool = False) -> EpisodeRecord:
    world, capture_ticks, events = initial_world(scenario, seed)
    log = list(events)
    trajectory = [snapshot(world, events)] if record_trajectory else None
    t_max = scenario.t_max
    mission = scenario.mission
    status = mission_status(capture_ticks, mission, world.tick, t_max, _removed_ids(world))
    while not status.terminal:
        world, events = step(world, scenario, capture_ticks)
        log.extend(events)
        if trajectory is not None:
            trajectory.append(snapshot(world, events))
        status = mission_status(capture_ticks, mission, world.tick, t_max, _removed_ids(world))
    outcome = EpisodeOutcome(status.state, dict(capture_ticks), world.tick, _removed_ids(world))
    return EpisodeRecord(outcome, seed, trajectory, log)


def run_episode(scenario: Scenario, seed: int, record_trajectory: bool = False, engine: str = "auto") -> EpisodeRecord:
    """Run one episode to a terminal mission status.

    ``engine`` selects the implementation: ``"python"`` is the reference
    loop, ``"compiled"`` the numba kernel (limited scenario class), and
    ``"auto"`` uses the kernel whenever it applies and no trajectory is
    requested. Both produce identical records.
    """
    if engine not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine != "python" and not record_trajectory:
        from . import _kernel

        if _kernel.supports(scenario):
            return _kernel.run_episode_compiled(scenario, seed)
        if engine == "compiled":
            raise ScenarioInvalid("engine: scenario is outside the compiled kernel's class")
    return run_episode_python(scenario, seed, record_trajectory)
