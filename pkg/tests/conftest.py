import pytest

from pursuitsim.arena import ArenaSpec, Region
from pursuitsim.capture import SURROUND4, TAG, CaptureRule, MissionSpec
from pursuitsim.engine import AgentSpec, Scenario
from pursuitsim.perception import SensingModel
from pursuitsim.policies import PolicySpec
from pursuitsim.world import HazardField, ScheduleSpec


def agent(i, role, start=None, policy=None, speed=1.0, sensing=None):
    if policy is None:
        policy = "greedy_pursuit" if role == "predator" else "stationary"
    return AgentSpec(i, role, start, speed, PolicySpec(policy), sensing or SensingModel())


def scenario(agents, width=5, height=5, kind="discrete", topology="bounded", capture=SURROUND4, radius=1.0,
             required=None, decoys=(), window=None, t_max=None, hazards=None, schedule=None, diagonal=False):
    prey = [a.id for a in agents if a.role == "prey"]
    required = frozenset(prey) - frozenset(decoys) if required is None else frozenset(required)
    return Scenario(
        ArenaSpec(kind, width, height, topology, diagonal),
        tuple(agents),
        CaptureRule(capture, radius=radius),
        MissionSpec(required, frozenset(decoys), window, t_max),
        hazards or HazardField(),
        schedule or ScheduleSpec(),
    )


@pytest.fixture
def figure1():
    """Prey at the centre of a 5x5 grid with a predator on each side."""
    agents = [
        agent(0, "predator", (2, 3), "cooperative_surround"),
        agent(1, "predator", (2, 1), "cooperative_surround"),
        agent(2, "predator", (1, 2), "cooperative_surround"),
        agent(3, "predator", (3, 2), "cooperative_surround"),
        agent(4, "prey", (2, 2), "random_walk"),
    ]
    return scenario(agents)
