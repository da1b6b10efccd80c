"""Throughput measurement in agent-ticks per second."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .arena import ArenaSpec
from .capture import TAG, CaptureRule, MissionSpec
from .engine import AgentSpec, Scenario, run_episode
from .policies import GREEDY_PURSUIT, RANDOM_WALK, PolicySpec
from .rng import replication_seed

# indicative single-thread target; CI asserts a quarter of it
TARGET_AGENT_TICKS_PER_S = 1_000_000


def size_sweep_scenario(size: int = 20) -> Scenario:
    """Four greedy predators chasing one random-walk prey, tag radius 1."""
    agents = [AgentSpec(i, "predator", policy=PolicySpec(GREEDY_PURSUIT)) for i in range(4)]
    agents.append(AgentSpec(4, "prey", policy=PolicySpec(RANDOM_WALK)))
    return Scenario(ArenaSpec("discrete", size, size), tuple(agents), CaptureRule(TAG, radius=1.0), MissionSpec(frozenset({4})))


@dataclass(frozen=True)
class BenchResult:
    episodes: int
    agent_ticks: int
    seconds: float

    @property
    def rate(self) -> float:
        return self.agent_ticks / self.seconds if self.seconds > 0 else float("inf")


def measure_throughput(scenario: Scenario, episodes: int = 2000, seed: int = 0, engine: str = "auto") -> BenchResult:
    """Time ``episodes`` episodes after one warm-up episode (which absorbs compilation)."""
    from . import _kernel

    run_episode(scenario, seed, engine=engine)
    seeds = [replication_seed(seed, 0, j) for j in range(episodes)]
    start = time.perf_counter()
    if engine != "python" and _kernel.supports(scenario):
        records = _kernel.run_batch_compiled(scenario, seeds)
    else:
        records = [run_episode(scenario, s, engine=engine) for s in seeds]
    seconds = time.perf_counter() - start
    n = len(scenario.agents)
    # tick 0 counts as a state the agents occupy but not a step taken
    ticks = sum(r.outcome.final_tick for r in records) * n
    return BenchResult(episodes, ticks, seconds)
