import math
import random

import pytest

from pursuitsim.arena import Action, ArenaSpec, legal_moves
from pursuitsim.errors import ValidationError
from pursuitsim.perception import Observation, Seen
from pursuitsim.policies import (
    PolicySpec,
    assign_capture_cells,
    capture_cells,
    decide,
    decide_cooperative_surround,
    decide_evasive,
    decide_greedy,
    decide_random_walk,
    surround_goals,
)
from pursuitsim.rng import SplitMix64

from oracles import evasive_oracle, greedy_oracle, grid_distance, min_assignment_cost, random_config

A5 = ArenaSpec("discrete", 5, 5)


def obs_at(pos, seen, arena=A5, role="predator", speed=1.0, heading=(1.0, 0.0)):
    visible = tuple(Seen(i, r, p, False) for i, r, p in seen)
    return Observation(0, role, pos, "active", heading, speed, arena, visible, 0)


class TestPolicySpec:
    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="unknown kind"):
            PolicySpec("teleport")

    def test_role_mismatch(self):
        with pytest.raises(ValidationError, match="not allowed"):
            PolicySpec("evasive").check_role("predator")


class TestRandomWalk:
    def test_forced_stay(self):
        assert decide_random_walk(obs_at((0, 0), []), [Action.STAY], SplitMix64(1)) == Action.STAY

    def test_replays_generator(self):
        legal = legal_moves((2, 2), A5)
        expected = SplitMix64(42).below(5)
        assert decide_random_walk(obs_at((2, 2), []), legal, SplitMix64(42)) == legal[expected]

    def test_uniform_frequencies(self):
        legal = legal_moves((2, 2), A5)
        rng = SplitMix64(2024)
        counts = {a: 0 for a in legal}
        for _ in range(10_000):
            counts[decide_random_walk(obs_at((2, 2), []), legal, rng)] += 1
        assert all(0.18 <= c / 10_000 <= 0.22 for c in counts.values())

    def test_continuous_full_speed(self):
        arena = ArenaSpec("continuous", 10, 10)
        vx, vy = decide_random_walk(obs_at((5.0, 5.0), [], arena, speed=0.7), None, SplitMix64(3))
        assert math.hypot(vx, vy) == pytest.approx(0.7)


class TestGreedy:
    def test_moves_toward_prey(self):
        assert decide_greedy(obs_at((0, 0), [(1, "prey", (3, 0))]), legal_moves((0, 0), A5)) == Action.RIGHT

    def test_no_prey_stays(self):
        assert decide_greedy(obs_at((0, 0), [(1, "predator", (3, 0))]), legal_moves((0, 0), A5)) == Action.STAY

    def test_adjacent_prey_cell_blocked(self):
        legal = legal_moves((0, 0), A5, occupied={(0, 1)})
        obs = obs_at((0, 0), [(1, "prey", (0, 1))])
        assert decide_greedy(obs, legal) == greedy_oracle(obs, legal) == Action.STAY

    def test_ignores_captured_prey(self):
        obs = Observation(0, "predator", (0, 0), "active", (1, 0), 1.0, A5,
                          (Seen(1, "prey", (1, 0), True), Seen(2, "prey", (0, 4), False)), 0)
        assert decide_greedy(obs, legal_moves((0, 0), A5)) == Action.UP

    def test_continuous_full_speed_toward_prey(self):
        arena = ArenaSpec("continuous", 20, 20)
        v = decide_greedy(obs_at((0.0, 0.0), [(1, "prey", (0.3, 0.4))], arena, speed=2.0), None)
        assert v == pytest.approx((1.2, 1.6))

    def test_oracle_random_configs(self):
        rng = random.Random(1)
        for _ in range(2000):
            obs, legal = random_config(rng, "predator")
            assert decide_greedy(obs, legal) == greedy_oracle(obs, legal)


class TestEvasive:
    def test_flees_right(self):
        obs = obs_at((2, 2), [(1, "predator", (0, 2))], role="prey")
        assert decide_evasive(obs, legal_moves((2, 2), A5)) == Action.RIGHT

    def test_no_threat_stays(self):
        assert decide_evasive(obs_at((2, 2), [], role="prey"), legal_moves((2, 2), A5)) == Action.STAY

    def test_symmetric_threats_tie_order(self):
        obs = obs_at((2, 2), [(1, "predator", (0, 2)), (2, "predator", (4, 2))], role="prey")
        assert decide_evasive(obs, legal_moves((2, 2), A5)) == Action.UP

    def test_continuous_keeps_heading_without_threats(self):
        arena = ArenaSpec("continuous", 10, 10)
        v = decide_evasive(obs_at((5.0, 5.0), [], arena, role="prey", heading=(0.0, 2.0)), None)
        assert v == pytest.approx((0.0, 1.0))

    def test_continuous_moves_away(self):
        arena = ArenaSpec("continuous", 20, 20)
        vx, vy = decide_evasive(obs_at((10.0, 10.0), [(1, "predator", (8.0, 10.0))], arena, role="prey"), None)
        assert vx == pytest.approx(1.0) and abs(vy) < 1e-9

    def test_oracle_random_configs(self):
        rng = random.Random(2)
        for _ in range(2000):
            obs, legal = random_config(rng, "prey")
            assert decide_evasive(obs, legal) == evasive_oracle(obs, legal)


class TestCooperative:
    def test_capture_cells(self):
        assert capture_cells((2, 2), A5) == [(2, 3), (2, 1), (1, 2), (3, 2)]
        assert capture_cells((0, 0), A5) == [(0, 1), (1, 0)]

    def test_each_takes_nearest_cell(self):
        team = [(0, (2, 4)), (1, (2, 0)), (2, (0, 2)), (3, (4, 2))]
        assignment, cost = assign_capture_cells(team, capture_cells((2, 2), A5), A5)
        assert assignment == {0: (2, 3), 1: (2, 1), 2: (1, 2), 3: (3, 2)}
        assert cost == 4

    def test_single_predator_matches_greedy_toward_cell(self):
        obs = obs_at((0, 0), [(1, "prey", (2, 2))])
        legal = legal_moves((0, 0), A5)
        assignment, _ = assign_capture_cells([(0, (0, 0))], capture_cells((2, 2), A5), A5)
        goal_obs = obs_at((0, 0), [(9, "prey", assignment[0])])
        assert decide_cooperative_surround(obs, 0, legal) == decide_greedy(goal_obs, legal)

    def test_no_prey_stays(self):
        obs = obs_at((0, 0), [(1, "predator", (4, 4))])
        assert decide_cooperative_surround(obs, 0, legal_moves((0, 0), A5)) == Action.STAY

    def test_assignment_is_optimal(self):
        rng = random.Random(3)
        arena = ArenaSpec("discrete", 9, 9)
        cells = arena.cells()
        for _ in range(500):
            picked = rng.sample(cells, 5)
            prey, team = picked[0], list(enumerate(picked[1:]))
            goals = capture_cells(prey, arena)
            _, cost = assign_capture_cells(team, goals, arena)
            assert cost == min_assignment_cost(team, goals, arena)

    def test_wall_prey_goals_leave_lure_free(self):
        goals = surround_goals((0, 2), A5)
        assert (1, 2) not in goals and len(goals) == 4

    def test_decide_dispatch_is_deterministic(self):
        obs = obs_at((0, 0), [(1, "prey", (3, 3))])
        legal = legal_moves((0, 0), A5)
        spec = PolicySpec("random_walk")
        assert decide(spec, obs, legal, SplitMix64(5)) == decide(spec, obs, legal, SplitMix64(5))
