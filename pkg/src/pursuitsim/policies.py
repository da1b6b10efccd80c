"""Scripted decision rules.

Discrete policies return an :class:`~pursuitsim.arena.Action` from the legal
list; continuous policies return a velocity ``(vx, vy)``. Ties between grid
actions are broken first by squared Euclidean distance and then by the fixed
action order (Stay, Up, Down, Left, Right, diagonals), so every decision is
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

from .arena import (
    CONTINUOUS,
    ORTHOGONAL_ACTIONS,
    Action,
    ArenaSpec,
    clamp_continuous,
    distance,
    signed_delta,
    squared_euclidean,
    step_destination,
)
from .errors import ValidationError
from .perception import Observation

RANDOM_WALK = "random_walk"
STATIONARY = "stationary"
GREEDY_PURSUIT = "greedy_pursuit"
COOPERATIVE_SURROUND = "cooperative_surround"
EVASIVE = "evasive"
POLICY_KINDS = (RANDOM_WALK, STATIONARY, GREEDY_PURSUIT, COOPERATIVE_SURROUND, EVASIVE)

ALLOWED_BY_ROLE = {
    "predator": (GREEDY_PURSUIT, COOPERATIVE_SURROUND, STATIONARY),
    "prey": (RANDOM_WALK, STATIONARY, EVASIVE),
}


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    salt: int = 0
    headings: int = 16  # continuous evasive resolution

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValidationError(f"policy: unknown kind {self.kind!r}")
        if self.headings < 1:
            raise ValidationError(f"policy.headings: must be >= 1, got {self.headings}")

    def check_role(self, role: str, where: str = "policy") -> None:
        if self.kind not in ALLOWED_BY_ROLE[role]:
            raise ValidationError(f"{where}: policy {self.kind!r} not allowed for role {role!r}")


def _nearest(obs: Observation, role: str, skip_captured: bool):
    best = None
    best_key = None
    for seen in obs.visible:
        if seen.role != role or (skip_captured and seen.captured):
            continue
        key = (distance(obs.pos, seen.pos, obs.arena), seen.id)
        if best_key is None or key < best_key:
            best, best_key = seen, key
    return best


def _toward(obs: Observation, goal) -> tuple:
    arena = obs.arena
    vx = signed_delta(obs.pos[0], goal[0], arena.width, arena.toroidal)
    vy = signed_delta(obs.pos[1], goal[1], arena.height, arena.toroidal)
    d = math.hypot(vx, vy)
    if d == 0:
        return (0.0, 0.0)
    return (vx / d * obs.speed, vy / d * obs.speed)


def _greedy_toward(obs: Observation, legal: list, goal) -> Action:
    arena = obs.arena
    best = None
    best_key = None
    for action in legal:
        dest = step_destination(obs.pos, action, arena)
        key = (distance(dest, goal, arena), squared_euclidean(dest, goal, arena))
        if best_key is None or key < best_key:
            best, best_key = action, key
    return best


def _away_from(obs: Observation, legal: list, threat) -> Action:
    arena = obs.arena
    best = None
    best_key = None
    for action in legal:
        dest = step_destination(obs.pos, action, arena)
        key = (-distance(dest, threat, arena), -squared_euclidean(dest, threat, arena))
        if best_key is None or key < best_key:
            best, best_key = action, key
    return best


def decide_random_walk(obs: Observation, legal: list, rng):
    """Uniform draw over ``legal``; in continuous arenas a uniform heading at full speed."""
    if obs.arena.kind == CONTINUOUS:
        theta = 2.0 * math.pi * rng.random()
        return (obs.speed * math.cos(theta), obs.speed * math.sin(theta))
    return legal[rng.below(len(legal))]


def decide_stationary(obs: Observation, legal: list):
    if obs.arena.kind == CONTINUOUS:
        return (0.0, 0.0)
    return Action.STAY


def decide_greedy(obs: Observation, legal: list):
    """Step that minimises distance to the nearest visible uncaptured prey."""
    target = _nearest(obs, "prey", skip_captured=True)
    if obs.arena.kind == CONTINUOUS:
        return (0.0, 0.0) if target is None else _toward(obs, target.pos)
    if target is None:
        return Action.STAY
    return _greedy_toward(obs, legal, target.pos)


def capture_cells(prey_pos, arena: ArenaSpec) -> list:
    """Distinct in-arena side cells of ``prey_pos`` in Up, Down, Left, Right order."""
    cells = []
    for action in ORTHOGONAL_ACTIONS[1:]:
        c = step_destination(prey_pos, action, arena)
        if c is not None and c not in cells and c != prey_pos:
            cells.append(c)
    return cells


def assign_capture_cells(predators: list, cells: list, arena: ArenaSpec, must_include=()):
    """Minimum-total-distance injective pairing of predators to cells.

    ``predators`` is a list of ``(id, pos)``. Returns ``({id: cell}, cost)``.
    Exhaustive over all pairings; the first optimum in enumeration order wins.
    When there are more predators than cells, pairings that leave out an id
    in ``must_include`` are skipped.
    """
    n_pred, n_cell = len(predators), len(cells)
    cost = [[distance(p, c, arena) for c in cells] for _, p in predators]
    best = None
    best_cost = math.inf
    if n_pred <= n_cell:
        for perm in permutations(range(n_cell), n_pred):
            total = sum(cost[i][perm[i]] for i in range(n_pred))
            if total < best_cost:
                best_cost, best = total, {predators[i][0]: cells[perm[i]] for i in range(n_pred)}
    else:
        required = [i for i, (pid, _) in enumerate(predators) if pid in must_include]
        for perm in permutations(range(n_pred), n_cell):
            if required and not all(i in perm for i in required):
                continue
            total = sum(cost[perm[k]][k] for k in range(n_cell))
            if total < best_cost:
                best_cost, best = total, {predators[perm[k]][0]: cells[k] for k in range(n_cell)}
    return (best or {}), (0.0 if best is None else best_cost)


def surround_goals(prey_pos, arena: ArenaSpec) -> list:
    """Cells the surround team should hold for a prey at ``prey_pos``.

    Away from walls these are the prey's four side cells. Against a bounded
    wall the prey cannot be surrounded, so the team herds instead: it takes
    the side cells of the prey's most open neighbour (the lure cell) plus one
    backstop beside the prey, leaving the lure cell free so the prey is never
    pinned in place.
    """
    return _surround_plan(prey_pos, arena)[0]


def _surround_plan(prey_pos, arena: ArenaSpec):
    sides = capture_cells(prey_pos, arena)
    if len(sides) == 4 or not sides:
        return sides, None
    lure = max(sides, key=lambda c: len(capture_cells(c, arena)))
    goals = [c for c in capture_cells(lure, arena) if c != prey_pos]
    backstop = [c for c in sides if c != lure]
    if backstop:
        goals.append(backstop[0])
    return goals, lure


def decide_cooperative_surround(obs: Observation, observer_id: int, legal: list):
    """Move toward this predator's cell in an optimal surround assignment.

    Up to four predators (self plus visible predators, lowest ids first) are
    paired with the goal cells of the nearest visible prey (see
    :func:`surround_goals`). A predator left without a cell, or in a
    continuous arena, pursues greedily; while herding a prey off a wall an
    unassigned predator instead steps away from it so the prey stays free.
    """
    if obs.arena.kind == CONTINUOUS:
        return decide_greedy(obs, legal)
    target = _nearest(obs, "prey", skip_captured=True)
    if target is None:
        return Action.STAY
    team = [(observer_id, obs.pos)] + [(s.id, s.pos) for s in obs.visible if s.role == "predator"]
    team.sort()
    team = team[:4]
    goals, lure = _surround_plan(target.pos, obs.arena)
    # whoever stands on the lure cell must get a goal, or it may be boxed in there
    on_lure = [pid for pid, pos in team if pos == lure]
    assignment, _ = assign_capture_cells(team, goals, obs.arena, on_lure)
    goal = assignment.get(observer_id)
    if goal is not None:
        return _greedy_toward(obs, legal, goal)
    if lure is not None:
        if distance(obs.pos, target.pos, obs.arena) > 1:
            return Action.STAY
        return _away_from(obs, legal, target.pos)
    return decide_greedy(obs, legal)


def decide_evasive(obs: Observation, legal: list, headings: int = 16):
    """Step that maximises the minimum distance to every visible predator."""
    arena = obs.arena
    threats = [s.pos for s in obs.visible if s.role == "predator"]
    if arena.kind == CONTINUOUS:
        if not threats:
            hx, hy = obs.heading
            norm = math.hypot(hx, hy) or 1.0
            return (hx / norm * obs.speed, hy / norm * obs.speed)
        best = (0.0, 0.0)
        best_d = min(distance(obs.pos, t, arena) for t in threats)
        for k in range(headings):
            theta = 2.0 * math.pi * k / headings
            v = (obs.speed * math.cos(theta), obs.speed * math.sin(theta))
            dest = clamp_continuous(obs.pos[0] + v[0], obs.pos[1] + v[1], arena)
            d = min(distance(dest, t, arena) for t in threats)
            if d > best_d:
                best, best_d = v, d
        return best
    if not threats:
        return Action.STAY
    best = None
    best_key = None
    for action in legal:
        dest = step_destination(obs.pos, action, arena)
        key = (
            -min(distance(dest, t, arena) for t in threats),
            -min(squared_euclidean(dest, t, arena) for t in threats),
        )
        if best_key is None or key < best_key:
            best, best_key = action, key
    return best


def decide(policy: PolicySpec, obs: Observation, legal: Optional[list], rng):
    kind = policy.kind
    if kind == GREEDY_PURSUIT:
        return decide_greedy(obs, legal)
    if kind == RANDOM_WALK:
        return decide_random_walk(obs, legal, rng)
    if kind == EVASIVE:
        return decide_evasive(obs, legal, policy.headings)
    if kind == COOPERATIVE_SURROUND:
        return decide_cooperative_surround(obs, obs.id, legal)
    return decide_stationary(obs, legal)
