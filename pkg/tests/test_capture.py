import pytest
from hypothesis import given, strategies as st

from pursuitsim.arena import ArenaSpec
from pursuitsim.capture import (
    IN_PROGRESS,
    SUCCESS,
    TIMEOUT,
    WINDOW_MISSED,
    CaptureRule,
    MissionSpec,
    is_surround_captured,
    is_tag_captured,
    mission_status,
)
from pursuitsim.errors import ValidationError
from pursuitsim.world import REMOVED, AgentState, WorldState

from oracles import naive_surrounded, surround_enumeration


def world(prey, predators, width=5, height=5, kind="discrete", topology="bounded"):
    agents = [AgentState(0, "prey", prey)] + [AgentState(i + 1, "predator", p) for i, p in enumerate(predators)]
    return WorldState(ArenaSpec(kind, width, height, topology), agents)


class TestSurround:
    def test_four_sides(self):
        assert is_surround_captured(world((2, 2), [(1, 2), (3, 2), (2, 1), (2, 3)]), 0)

    def test_three_sides(self):
        assert not is_surround_captured(world((2, 2), [(1, 2), (3, 2), (2, 1)]), 0)

    def test_wall_does_not_count(self):
        assert not is_surround_captured(world((0, 2), [(0, 1), (0, 3), (1, 2)]), 0)

    def test_walls_assist_option(self):
        assert is_surround_captured(world((0, 2), [(0, 1), (0, 3), (1, 2)]), 0, walls_assist=True)

    def test_toroidal_wrap(self):
        w = world((0, 0), [(0, 1), (0, 4), (4, 0), (1, 0)], topology="toroidal")
        assert is_surround_captured(w, 0)

    def test_removed_predator_does_not_count(self):
        w = world((2, 2), [(1, 2), (3, 2), (2, 1), (2, 3)])
        w.agents[4].status = REMOVED
        assert not is_surround_captured(w, 0)

    def test_exhaustive_4x4_matches_naive(self):
        n = 0
        for prey, preds in surround_enumeration():
            assert is_surround_captured(world(prey, preds, 4, 4), 0) == naive_surrounded(prey, preds, 4, 4)
            n += 1
        assert n == 16 * 1365


class TestTag:
    C = dict(kind="continuous", width=10, height=10)

    def test_inside_radius(self):
        assert is_tag_captured(world((5.0, 5.0), [(5.05, 5.0)], **self.C), 0, CaptureRule("tag", radius=0.1))

    def test_outside_radius(self):
        assert not is_tag_captured(world((5.0, 5.0), [(5.2, 5.0)], **self.C), 0, CaptureRule("tag", radius=0.1))

    def test_boundary_is_closed(self):
        assert is_tag_captured(world((5.0, 5.0), [(5.5, 5.0)], **self.C), 0, CaptureRule("tag", radius=0.5))

    def test_proximity_is_open(self):
        assert not is_tag_captured(world((5.0, 5.0), [(5.5, 5.0)], **self.C), 0, CaptureRule("proximity", epsilon=0.5))

    @given(st.floats(0, 9.99), st.floats(0, 9.99), st.floats(0.01, 5), st.floats(0.01, 5))
    def test_monotone_in_radius(self, x, y, r1, r2):
        lo, hi = sorted((r1, r2))
        w = world((5.0, 5.0), [(x, y)], **self.C)
        if is_tag_captured(w, 0, CaptureRule("tag", radius=lo)):
            assert is_tag_captured(w, 0, CaptureRule("tag", radius=hi))

    def test_rule_validation(self):
        with pytest.raises(ValidationError, match="tag_radius"):
            CaptureRule("tag", radius=0)


class TestMissionStatus:
    A, B, D = 1, 2, 3

    def test_success_inside_window(self):
        m = MissionSpec(frozenset({self.A, self.B}), window_ticks=100, t_max=200)
        assert mission_status({self.A: 40, self.B: 90}, m, 90) == (SUCCESS, 90)

    def test_decoy_only_times_out(self):
        m = MissionSpec(frozenset({self.A}), frozenset({self.D}), t_max=200)
        assert mission_status({self.D: 5}, m, 150).state == IN_PROGRESS
        assert mission_status({self.D: 5}, m, 200).state == TIMEOUT

    def test_window_missed(self):
        m = MissionSpec(frozenset({self.A, self.B}), window_ticks=50, t_max=200)
        assert mission_status({self.A: 10, self.B: 70}, m, 70).state == WINDOW_MISSED

    def test_window_elapsed_runs_to_t_max(self):
        m = MissionSpec(frozenset({self.A, self.B}), window_ticks=50, t_max=200)
        assert mission_status({self.A: 10}, m, 120).state == IN_PROGRESS
        assert mission_status({self.A: 10}, m, 200).state == WINDOW_MISSED

    def test_removed_required_prey(self):
        m = MissionSpec(frozenset({self.A}), t_max=50)
        assert mission_status({}, m, 20, removed=[self.A]).state == IN_PROGRESS
        assert mission_status({}, m, 50, removed=[self.A]).state == TIMEOUT

    def test_success_is_sticky(self):
        m = MissionSpec(frozenset({self.A}), t_max=50)
        assert all(mission_status({self.A: 3}, m, t).state == SUCCESS for t in range(3, 60))

    def test_validation(self):
        with pytest.raises(ValidationError, match="mission.decoys"):
            MissionSpec(frozenset({1}), frozenset({1}))
        with pytest.raises(ValidationError, match="mission.window"):
            MissionSpec(frozenset({1}), window_ticks=20, t_max=10)
