"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py``.
"""

import itertools
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from pursuitsim.arena import Region
from pursuitsim.bench import TARGET_AGENT_TICKS_PER_S, measure_throughput
from pursuitsim.capture import SUCCESS, TIMEOUT, is_surround_captured
from pursuitsim.config import parse_sweep
from pursuitsim.engine import run_episode
from pursuitsim.experiments import fit_power_law, format_summary, materialize, parse_fit_footer, rank_correlation, run_sweep
from pursuitsim.policies import assign_capture_cells, capture_cells, decide_evasive, decide_greedy
from pursuitsim.records import trajectory_text
from pursuitsim.world import ACTIVE, REMOVED, SLOWED, HazardField, InjuryPatch

from conftest import agent, scenario
from oracles import (
    evasive_oracle,
    greedy_oracle,
    min_assignment_cost,
    naive_surrounded,
    random_config,
    surround_enumeration,
)
from test_capture import world as capture_world

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
RESULTS = {}


@contextmanager
def criterion(number, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        RESULTS[number] = f"criterion {number:2d} FAIL  {title}  ({type(exc).__name__}: {str(exc)[:120]})"
        raise
    RESULTS[number] = f"criterion {number:2d} PASS  {title}  [{time.perf_counter() - start:.1f}s]"


@pytest.fixture(scope="module", autouse=True)
def report(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = [RESULTS[k] for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_sep("-", "acceptance criteria")
        for line in lines:
            reporter.write_line(line)
    else:
        print("\n".join(lines))


@pytest.fixture(scope="module")
def size_sweep():
    return parse_sweep(SCENARIOS / "sweep_arena_size.json")


def test_c01_surround_oracle_exhaustive():
    with criterion(1, "surround4 agrees with naive checker on every 4x4 placement"):
        start = time.perf_counter()
        total = 0
        for prey, preds in surround_enumeration(4, 4):
            w = capture_world(prey, preds, 4, 4)
            assert is_surround_captured(w, 0) == naive_surrounded(prey, preds, 4, 4), (prey, preds)
            total += 1
        assert total == 16 * math.comb(15, 4)
        assert time.perf_counter() - start < 10


def test_c02_trivial_arena_capture():
    with criterion(2, "5x5 cooperative surround captures >= 99% of 1000 seeds by tick 200"):
        start = time.perf_counter()
        agents = [agent(i, "predator", None, "cooperative_surround") for i in range(4)]
        sc = scenario(agents + [agent(4, "prey", None, "random_walk")], t_max=200)
        captures = sum(run_episode(sc, seed).outcome.result == SUCCESS for seed in range(1000))
        assert captures / 1000 >= 0.99, captures
        assert time.perf_counter() - start < 30


def test_c03_size_sweep_monotone_power_fit(size_sweep):
    with criterion(3, "mean capture ticks rise with arena size (Spearman >= 0.9), fit b > 0"):
        start = time.perf_counter()
        assert size_sweep.values == (5, 8, 11, 14, 17, 20) and size_sweep.replications == 500
        result = run_sweep(size_sweep)
        means = [r.mean_ticks for r in result.rows]
        assert None not in means
        assert rank_correlation(list(size_sweep.values), means) >= 0.9
        footer = parse_fit_footer(format_summary(result))
        assert footer["b"] > 0 and 0 <= footer["r_squared"] <= 1
        assert time.perf_counter() - start < 300


def test_c04_velocity_ratio_monotone():
    with criterion(4, "capture probability non-decreasing in velocity ratio within Wilson CI"):
        start = time.perf_counter()
        spec = parse_sweep(SCENARIOS / "sweep_velocity_ratio.json")
        assert spec.base.arena.kind == "continuous" and spec.base.capture.radius == 0.5
        assert spec.values == (0.6, 0.8, 1.0, 1.2, 1.5, 2.0) and spec.replications == 500
        rows = run_sweep(spec).rows
        for lo, hi in zip(rows, rows[1:]):
            assert hi.capture_prob >= lo.ci_low, (lo, hi)
        assert time.perf_counter() - start < 300


def test_c05_decoy_capture_is_not_success():
    with criterion(5, "capturing only the decoy ends in timeout"):
        # the required prey sits in a corner walled off by barriers; the decoy is in reach
        hz = HazardField(barriers=Region.of_cells([(3, 4), (4, 3)]))
        agents = [agent(0, "predator", (0, 0)), agent(1, "prey", (2, 0)), agent(2, "prey", (4, 4))]
        sc = scenario(agents, capture="tag", required=[2], decoys=[1], hazards=hz, t_max=40)
        rec = run_episode(sc, 0)
        assert rec.outcome.capture_ticks.get(1) == 1
        assert 2 not in rec.outcome.capture_ticks
        assert rec.outcome.result == TIMEOUT and rec.outcome.final_tick == 40


def _corridor(patch=None, lethal=None, t_max=24):
    hz = HazardField(
        patches=(patch,) if patch else (),
        lethal=(Region.of_cells([lethal]),) if lethal else (),
    )
    agents = [agent(0, "predator", (0, 0)), agent(1, "prey", (39, 0))]
    sc = scenario(agents, 40, 1, capture="tag", hazards=hz, t_max=t_max)
    return run_episode(sc, 0, record_trajectory=True).trajectory


def _steps_within_bounds(xs, speed):
    for i, j in itertools.combinations(range(len(xs)), 2):
        k = j - i
        if not math.floor(k * speed) <= xs[j] - xs[i] <= math.ceil(k * speed):
            return False
    return True


def test_c06_hazard_semantics():
    with criterion(6, "lethal removal on entry, temporary slow for its duration, permanent slow persists"):
        # (a) lethal: removed in the tick the agent enters
        traj = _corridor(lethal=(3, 0))
        status = {f.tick: f.agents[0][4] for f in traj}
        pos = {f.tick: f.agents[0][2] for f in traj}
        assert pos[3] == 3 and status[3] == REMOVED and status[2] == ACTIVE
        assert all(status[t] == REMOVED for t in status if t >= 3)
        removed_events = [e for f in traj for e in f.events if e.type == "removed"]
        assert [(e.agent, e.tick) for e in removed_events] == [(0, 3)]

        # (b) temporary patch: slowed exactly `duration` ticks after the last tick spent on it
        duration, factor = 6, 0.5
        traj = _corridor(patch=InjuryPatch(Region.of_cells([(2, 0)]), factor, duration))
        xs = [f.agents[0][2] for f in traj]
        status = [f.agents[0][4] for f in traj]
        last_on = max(t for t, x in enumerate(xs) if x == 2)
        assert all(status[t] == SLOWED for t in range(xs.index(2), last_on + duration))
        assert status[last_on + duration] == ACTIVE
        # speed in force during tick t is the status left by tick t - 1
        slowed_window = xs[last_on:last_on + duration + 1]
        assert _steps_within_bounds(slowed_window, factor)
        assert _steps_within_bounds(xs[last_on + duration:], 1.0)

        # (c) permanent patch: slowed until the episode ends
        traj = _corridor(patch=InjuryPatch(Region.of_cells([(2, 0)]), factor, None))
        xs = [f.agents[0][2] for f in traj]
        first_on = xs.index(2)
        assert all(f.agents[0][4] == SLOWED for f in traj[first_on:])
        assert _steps_within_bounds(xs[first_on:], factor)


def test_c07_determinism_and_parallel_equivalence(size_sweep):
    with criterion(7, "sweep CSV identical at parallel 1 and 8; trajectories byte-identical"):
        serial = format_summary(run_sweep(size_sweep, parallel=1)).encode()
        parallel = format_summary(run_sweep(size_sweep, parallel=8)).encode()
        assert serial == parallel
        for value in size_sweep.values:
            sc = materialize(size_sweep.base, size_sweep, value)
            for seed in (0, 1, 2**63 + 5):
                a = trajectory_text(sc, run_episode(sc, seed, record_trajectory=True))
                b = trajectory_text(sc, run_episode(sc, seed, record_trajectory=True))
                assert a.encode() == b.encode()


def test_c08_policy_optimality_oracles():
    with criterion(8, "greedy/evasive match exhaustive oracles, surround assignment matches 4! optimum"):
        rng = random.Random(8)
        for _ in range(10_000):
            obs, legal = random_config(rng, "predator")
            assert decide_greedy(obs, legal) == greedy_oracle(obs, legal)
            obs, legal = random_config(rng, "prey")
            assert decide_evasive(obs, legal) == evasive_oracle(obs, legal)
        for _ in range(10_000):
            obs, _ = random_config(rng, "predator")
            prey = obs.visible[0].pos
            team = [(0, obs.pos)] + [(s.id, s.pos) for s in obs.visible[1:]]
            team = team[:4]
            cells = capture_cells(prey, obs.arena)
            _, cost = assign_capture_cells(team, cells, obs.arena)
            assert cost == min_assignment_cost(team, cells, obs.arena)


def test_c09_power_law_recovery():
    with criterion(9, "power-law fit recovers 9 (a, b) pairs to 1e-9 with r^2 = 1"):
        for a, b in itertools.product([0.5, 2, 10], [1, 1.5, 2]):
            fit = fit_power_law([(L, a * L ** b) for L in (5, 8, 11, 14, 17, 20)])
            assert abs(fit.a - a) / a < 1e-9 and abs(fit.b - b) / b < 1e-9
            assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_c10_throughput(size_sweep):
    floor = TARGET_AGENT_TICKS_PER_S // 4
    with criterion(10, f"throughput on the size-sweep class >= {floor:,} agent-ticks/s"):
        ticks = seconds = 0.0
        for value in size_sweep.values:
            res = measure_throughput(materialize(size_sweep.base, size_sweep, value), episodes=2000)
            ticks += res.agent_ticks
            seconds += res.seconds
        rate = ticks / seconds
        print(f"measured {rate:,.0f} agent-ticks/s")
        assert rate >= floor, f"{rate:,.0f} agent-ticks/s"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
