"""Monte Carlo parameter sweeps, summary tables, and scaling fits."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .arena import DISCRETE, ArenaSpec, Region
from .capture import SUCCESS, MissionSpec
from .engine import AgentSpec, EpisodeRecord, Scenario, run_episode
from .errors import DegenerateInput, Infeasible, InsufficientPoints, PursuitError, ValidationError
from .rng import HAZARD_LAYOUT_TAG, SplitMix64, derive_seed, replication_seed
from .statistics import summarize_sample, wilson_interval
from .world import PREDATOR, PREY, HazardField, InjuryPatch, ScheduleSpec

ARENA_SIZE = "arena_size"
VELOCITY_RATIO = "velocity_ratio"
PREY_COUNT = "prey_count"
HAZARD_DENSITY = "hazard_density"
SWEEP_VARIABLES = (ARENA_SIZE, VELOCITY_RATIO, PREY_COUNT, HAZARD_DENSITY)

CSV_HEADER = "sweep_variable,value,replications,captures,capture_prob,ci_low,ci_high,mean_ticks,median_ticks,std_ticks"


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    variable: str
    values: Tuple[float, ...]
    replications: int
    base_seed: int = 0
    velocity_mode: str = "homogeneous"
    multipliers: Tuple[float, ...] = ()
    decoy_policy: str = "none"
    hazard_kind: str = "lethal"
    patch_factor: float = 0.5
    patch_duration: Optional[int] = 10
    min_capture_prob: float = 0.5

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValidationError(f"variable: unknown sweep variable {self.variable!r}")
        if not self.values:
            raise ValidationError("values: at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError(f"values: must be strictly increasing, got {list(self.values)}")
        if self.replications < 1:
            raise ValidationError(f"replications: must be >= 1, got {self.replications}")
        if self.velocity_mode not in ("homogeneous", "heterogeneous"):
            raise ValidationError(f"velocity_mode: unknown mode {self.velocity_mode!r}")
        if self.velocity_mode == "heterogeneous":
            if len(self.multipliers) != len(self.base.predator_ids):
                raise ValidationError("multipliers: need one multiplier per predator")
            if any(m <= 0 for m in self.multipliers):
                raise ValidationError("multipliers: must all be > 0")
        if self.decoy_policy not in ("none", "one_decoy"):
            raise ValidationError(f"decoy_policy: unknown policy {self.decoy_policy!r}")
        if self.hazard_kind not in ("lethal", "patch"):
            raise ValidationError(f"hazard_kind: expected 'lethal' or 'patch', got {self.hazard_kind!r}")
        if self.variable == HAZARD_DENSITY:
            if self.base.arena.kind != DISCRETE:
                raise ValidationError("variable: hazard_density sweeps need a discrete arena")
            if not all(0 <= v <= 1 for v in self.values):
                raise ValidationError("values: hazard densities must lie in [0, 1]")
        if self.variable == ARENA_SIZE and any(v < 1 for v in self.values):
            raise ValidationError("values: arena sizes must be >= 1")
        if self.variable == VELOCITY_RATIO and any(v <= 0 for v in self.values):
            raise ValidationError("values: velocity ratios must be > 0")
        if self.variable == PREY_COUNT and any(int(v) != v or v < 1 for v in self.values):
            raise ValidationError("values: prey counts must be positive integers")


@dataclass(frozen=True)
class SummaryRow:
    value: float
    episodes: int
    captures: int
    capture_prob: float
    ci_low: float
    ci_high: float
    mean_ticks: Optional[float]
    median_ticks: Optional[float]
    std_ticks: Optional[float]


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    r_squared: float
    points_used: int
    excluded_values: Tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
            "excluded_values": list(self.excluded_values),
        }


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: List[SummaryRow]
    # (value index, replication, record) in deterministic order
    episodes: List[Tuple[int, int, EpisodeRecord]] = field(default_factory=list)
    fit: Optional[FitResult] = None
    fit_error: Optional[str] = None


# ---------------------------------------------------------------- materialize

def _scale_cells(cells, factor: float, size: int):
    return frozenset((min(int(x * factor), size - 1), min(int(y * factor), size - 1)) for x, y in cells)


def _scale_region(region: Region, factor: float, size: int) -> Region:
    return Region(
        _scale_cells(region.cells, factor, size),
        tuple(tuple(v * factor for v in r) for r in region.rects),
    )


def _resize(base: Scenario, size) -> Scenario:
    arena = base.arena
    if arena.width != arena.height:
        raise ValidationError("variable: arena_size sweeps need a square base arena")
    factor = size / arena.width
    discrete = arena.kind == DISCRETE
    if discrete:
        size = int(size)
    agents = []
    for a in base.agents:
        start = a.start
        if start is not None:
            if discrete:
                start = (min(int(start[0] * factor), size - 1), min(int(start[1] * factor), size - 1))
            else:
                start = (start[0] * factor, start[1] * factor)
        agents.append(replace(a, start=start))
    fixed = [a.start for a in agents if a.start is not None]
    if discrete and len(set(fixed)) != len(fixed):
        raise Infeasible(f"arena_size {size}: rescaled fixed starts collide")
    hz = base.hazards
    hazards = HazardField(
        _scale_region(hz.barriers, factor, size),
        tuple(replace(p, region=_scale_region(p.region, factor, size)) for p in hz.patches),
        tuple(_scale_region(z, factor, size) for z in hz.lethal),
    )
    if discrete and len(hazards.barriers.cells) + len(agents) > size * size:
        raise Infeasible(f"arena_size {size}: {len(agents)} agents and {len(hazards.barriers.cells)} barriers exceed the free cells")
    try:
        return replace(base, arena=replace(arena, width=size, height=size), agents=tuple(agents), hazards=hazards)
    except ValidationError as exc:
        raise Infeasible(f"arena_size {size}: {exc}") from exc


def _set_velocity(base: Scenario, ratio: float, spec: SweepSpec) -> Scenario:
    prey_speed = next(a.speed for a in base.agents if a.role == PREY)
    predators = [a for a in base.agents if a.role == PREDATOR]
    if spec.velocity_mode == "heterogeneous":
        mean_m = sum(spec.multipliers) / len(spec.multipliers)
        speeds = {a.id: ratio * prey_speed * m / mean_m for a, m in zip(predators, spec.multipliers)}
    else:
        speeds = {a.id: ratio * prey_speed for a in predators}
    agents = tuple(replace(a, speed=speeds[a.id]) if a.id in speeds else a for a in base.agents)
    return replace(base, agents=agents)


def _set_prey_count(base: Scenario, count: int, spec: SweepSpec) -> Scenario:
    count = int(count)
    old_prey = [a for a in base.agents if a.role == PREY]
    template = old_prey[0]
    predators = [a for a in base.agents if a.role == PREDATOR]
    first = max(a.id for a in predators) + 1
    prey = []
    for k in range(count):
        start = old_prey[k].start if k < len(old_prey) else None
        prey.append(replace(template, id=first + k, start=start))
    ids = [a.id for a in prey]
    if spec.decoy_policy == "one_decoy":
        if count < 2:
            raise Infeasible(f"prey_count {count}: one_decoy needs at least two prey")
        required, decoys = frozenset(ids[:-1]), frozenset(ids[-1:])
    else:
        required, decoys = frozenset(ids), frozenset()
    mission = replace(base.mission, required_prey=required, decoy_prey=decoys)
    sched = base.schedule
    if sched.mode == "turn_taking":
        order = [i for i in sched.order if i in {a.id for a in predators}] + ids
        sched = replace(sched, order=tuple(order))
    elif sched.periods:
        period = sched.period_of(template.id)
        keep = tuple((i, p) for i, p in sched.periods if i in {a.id for a in predators})
        sched = replace(sched, periods=keep + tuple((i, period) for i in ids))
    agents = tuple(predators) + tuple(prey)
    if base.arena.kind == DISCRETE and len(agents) + len(base.hazards.barriers.cells) > base.arena.width * base.arena.height:
        raise Infeasible(f"prey_count {count}: agents and barriers exceed the free cells")
    return replace(base, agents=agents, mission=mission, schedule=sched)


def _set_hazard_density(base: Scenario, density: float, spec: SweepSpec, seed: int) -> Scenario:
    hz = base.hazards
    fixed = {a.start for a in base.agents if a.start is not None}
    used = set(hz.barriers.cells)
    for z in hz.lethal:
        used |= z.cells
    for p in hz.patches:
        used |= p.region.cells
    free = [c for c in base.arena.cells() if c not in used and c not in fixed]
    n = int(round(density * len(free)))
    n_random = sum(a.start is None for a in base.agents)
    if len(free) - n < n_random:
        raise Infeasible(
            f"hazard_density {density}: {n} hazard cells leave {len(free) - n} free cells for {n_random} random starts"
        )
    rng = SplitMix64(seed)
    chosen = []
    for _ in range(n):
        chosen.append(free.pop(rng.below(len(free))))
    region = Region.of_cells(chosen)
    if spec.hazard_kind == "lethal":
        hazards = replace(hz, lethal=hz.lethal + ((region,) if chosen else ()))
    else:
        patch = InjuryPatch(region, spec.patch_factor, spec.patch_duration)
        hazards = replace(hz, patches=hz.patches + ((patch,) if chosen else ()))
    return replace(base, hazards=hazards)


def materialize(base: Scenario, spec: SweepSpec, value) -> Scenario:
    """The concrete scenario for one swept value.

    Hazard layouts are drawn from a substream keyed by the value's index, so
    all replications of a value share one layout.
    """
    if value not in spec.values:
        raise ValidationError(f"values: {value} is not one of the sweep values")
    variable = spec.variable
    if variable == ARENA_SIZE:
        return _resize(base, value)
    if variable == VELOCITY_RATIO:
        return _set_velocity(base, value, spec)
    if variable == PREY_COUNT:
        return _set_prey_count(base, value, spec)
    index = spec.values.index(value)
    return _set_hazard_density(base, value, spec, derive_seed(spec.base_seed, HAZARD_LAYOUT_TAG + index))


# ---------------------------------------------------------------- execution

def _run_chunk(task):
    scenario, value_index, first_rep, seeds = task
    from . import _kernel

    try:
        if _kernel.supports(scenario):
            return _kernel.run_batch_compiled(scenario, seeds)
        return [run_episode(scenario, s, engine="python") for s in seeds]
    except PursuitError:
        # locate the failing replication for the error message
        for j, s in enumerate(seeds):
            try:
                run_episode(scenario, s, engine="python")
            except PursuitError as exc:
                raise type(exc)(f"value index {value_index}, replication {first_rep + j}: {exc}") from exc
        raise


def _summarize(value, records: Sequence[EpisodeRecord]) -> SummaryRow:
    reps = len(records)
    ticks = [r.outcome.final_tick for r in records if r.outcome.result == SUCCESS]
    captures = len(ticks)
    low, high = wilson_interval(captures, reps)
    s = summarize_sample(ticks)
    return SummaryRow(value, reps, captures, captures / reps, low, high, s.mean, s.median, s.std)


def run_sweep(spec: SweepSpec, parallel: int = 1, chunk_size: int = 250) -> SweepResult:
    """Run every (value, replication) episode and aggregate per value.

    Replication ``j`` of value ``i`` uses seed ``replication_seed(base_seed, i, j)``.
    The output does not depend on ``parallel``.
    """
    if parallel < 1:
        raise ValidationError(f"--parallel: must be >= 1, got {parallel}")
    tasks = []
    for i, value in enumerate(spec.values):
        try:
            scenario = materialize(spec.base, spec, value)
        except PursuitError as exc:
            raise type(exc)(f"value {value}: {exc}") from exc
        seeds = [replication_seed(spec.base_seed, i, j) for j in range(spec.replications)]
        for start in range(0, len(seeds), chunk_size):
            tasks.append((scenario, i, start, seeds[start:start + chunk_size]))
    if parallel == 1:
        chunks = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    per_value = [[] for _ in spec.values]
    episodes = []
    for (scenario, i, start, _), records in zip(tasks, chunks):
        for j, rec in enumerate(records):
            per_value[i].append(rec)
            episodes.append((i, start + j, rec))
    rows = [_summarize(v, recs) for v, recs in zip(spec.values, per_value)]
    result = SweepResult(spec, rows, episodes)
    try:
        result.fit = fit_power_law(
            [(r.value, r.mean_ticks) for r in rows],
            [r.capture_prob for r in rows],
            spec.min_capture_prob,
        )
    except (InsufficientPoints, DegenerateInput) as exc:
        result.fit_error = str(exc)
    return result


# ---------------------------------------------------------------- fitting

def fit_power_law(points, capture_probs=None, min_capture_prob: float = 0.5) -> FitResult:
    """Least-squares fit of ``T = a * L**b`` in log-log space.

    Points whose capture probability is below ``min_capture_prob``, or with
    a non-positive or missing coordinate, are excluded and reported.
    """
    if capture_probs is None:
        capture_probs = [1.0] * len(points)
    used, excluded = [], []
    for (L, T), p in zip(points, capture_probs):
        if p < min_capture_prob or L is None or T is None or L <= 0 or T <= 0:
            excluded.append(L)
        else:
            used.append((float(L), float(T)))
    if len(used) < 2:
        raise InsufficientPoints(f"fit_power_law: {len(used)} usable point(s), need at least 2")
    x = np.log([L for L, _ in used])
    y = np.log([T for _, T in used])
    if np.all(x == x[0]):
        raise DegenerateInput("fit_power_law: all L values are equal")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    b = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = ym - b * xm
    resid = y - (intercept + b * x)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(float(math.exp(intercept)), b, r2, len(used), tuple(excluded))


def rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman coefficient with average ranks for ties."""
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("rank_correlation: need two sequences of equal length >= 3")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("rank_correlation: xs must be strictly increasing")
    if all(y == ys[0] for y in ys):
        raise DegenerateInput("rank_correlation: ys are all equal")
    return float(stats.spearmanr(xs, ys).statistic)


# ---------------------------------------------------------------- output

def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) or float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _f6(v) -> str:
    return "" if v is None else f"{v:.6f}"


def format_summary(result: SweepResult) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    name = result.spec.variable
    for r in result.rows:
        out.write(",".join([
            name, _num(r.value), str(r.episodes), str(r.captures), _f6(r.capture_prob), _f6(r.ci_low),
            _f6(r.ci_high), _f6(r.mean_ticks), _f6(r.median_ticks), _f6(r.std_ticks),
        ]) + "\n")
    footer = result.fit.to_dict() if result.fit is not None else {"error": result.fit_error}
    out.write("# fit " + json.dumps(footer) + "\n")
    return out.getvalue()


def parse_fit_footer(text: str) -> dict:
    for line in text.splitlines():
        if line.startswith("# fit "):
            return json.loads(line[len("# fit "):])
    raise ValueError("no fit footer found")
