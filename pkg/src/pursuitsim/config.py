"""JSON scenario and sweep files.

Scenario documents have these top-level keys (``arena``, ``agents`` and
``rules`` are required)::

    arena     {kind, width, height, topology="bounded", allow_diagonal=false}
    agents    [{id, role, policy, start="random", speed=1.0, sensing}]
    hazards   {barriers=[], patches=[{region, factor, duration, roles}], lethal=[]}
    rules     {capture, tag_radius=1.0, epsilon=1.0, walls_assist=false, t_max}
    mission   {required=<all prey>, decoys=[], window=null}
    schedule  {mode="synchronous", order=[], periods=[[id, period], ...]}

Regions are lists of ``[x, y]`` cells in discrete arenas and of
``[x0, y0, x1, y1]`` half-open rectangles in continuous ones. A policy is
either a kind name or ``{kind, salt, headings}``; sensing is
``{mode, params}`` and defaults to omniscient. Unknown keys anywhere are
rejected.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any, Optional

from .arena import CONTINUOUS, DISCRETE, ArenaSpec, Region
from .capture import CaptureRule, MissionSpec
from .engine import AgentSpec, Scenario
from .errors import ParseError, UnknownKey, ValidationError
from .experiments import SweepSpec
from .perception import SensingModel
from .policies import PolicySpec
from .world import PREY, ROLES, HazardField, InjuryPatch, ScheduleSpec

_PERMANENT = "permanent"


def _check_keys(obj, allowed, where: str, required=()) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            raise UnknownKey(f"{where}.{key}: unknown key {key!r}" if where else f"{key}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ValidationError(f"{where}.{key}: required key missing" if where else f"{key}: required key missing")
    return obj


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{where}: expected an integer, got {v!r}")
    return v


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    return v


def _bool(v, where: str) -> bool:
    if not isinstance(v, bool):
        raise ValidationError(f"{where}: expected true or false, got {v!r}")
    return v


def _str(v, where: str) -> str:
    if not isinstance(v, str):
        raise ValidationError(f"{where}: expected a string, got {v!r}")
    return v


def _list(v, where: str) -> list:
    if not isinstance(v, list):
        raise ValidationError(f"{where}: expected a list, got {v!r}")
    return v


def _opt_int(v, where: str) -> Optional[int]:
    return None if v is None else _int(v, where)


# ---------------------------------------------------------------- reading

def _region(items, arena: ArenaSpec, where: str) -> Region:
    cells, rects = [], []
    for k, item in enumerate(_list(items, where)):
        item = _list(item, f"{where}[{k}]")
        if arena.kind == DISCRETE:
            if len(item) != 2:
                raise ValidationError(f"{where}[{k}]: expected an [x, y] cell")
            cells.append((_int(item[0], f"{where}[{k}]"), _int(item[1], f"{where}[{k}]")))
        else:
            if len(item) != 4:
                raise ValidationError(f"{where}[{k}]: expected an [x0, y0, x1, y1] rectangle")
            rects.append(tuple(float(_num(v, f"{where}[{k}]")) for v in item))
    region = Region(frozenset(cells), tuple(rects))
    region.check_within(arena, where)
    return region


def _arena(d) -> ArenaSpec:
    _check_keys(d, ("kind", "width", "height", "topology", "allow_diagonal"), "arena", ("kind", "width", "height"))
    return ArenaSpec(
        kind=_str(d["kind"], "arena.kind"),
        width=_num(d["width"], "arena.width"),
        height=_num(d["height"], "arena.height"),
        topology=_str(d.get("topology", "bounded"), "arena.topology"),
        allow_diagonal=_bool(d.get("allow_diagonal", False), "arena.allow_diagonal"),
    )


def _policy(v, where: str) -> PolicySpec:
    if isinstance(v, str):
        return PolicySpec(v)
    _check_keys(v, ("kind", "salt", "headings"), where, ("kind",))
    return PolicySpec(
        _str(v["kind"], f"{where}.kind"),
        _int(v.get("salt", 0), f"{where}.salt"),
        _int(v.get("headings", 16), f"{where}.headings"),
    )


def _sensing(v, where: str) -> SensingModel:
    _check_keys(v, ("mode", "params"), where, ("mode",))
    params = _check_keys(v.get("params", {}), ("r", "r_range", "angle", "range", "detection_range"), f"{where}.params")
    kw: dict = {"mode": _str(v["mode"], f"{where}.mode")}
    for key in ("r", "angle", "range"):
        if key in params:
            kw[key] = float(_num(params[key], f"{where}.params.{key}"))
    if "r_range" in params:
        lo_hi = _list(params["r_range"], f"{where}.params.r_range")
        if len(lo_hi) != 2:
            raise ValidationError(f"{where}.params.r_range: expected [lo, hi]")
        kw["r_range"] = tuple(float(_num(x, f"{where}.params.r_range")) for x in lo_hi)
    if "detection_range" in params:
        dr = _check_keys(params["detection_range"], ROLES, f"{where}.params.detection_range")
        kw["detection_range"] = tuple(
            (role, float(_num(dr[role], f"{where}.params.detection_range.{role}"))) for role in ROLES if role in dr
        )
    return SensingModel(**kw)


def _agent(d, k: int, arena: ArenaSpec) -> AgentSpec:
    where = f"agents[{k}]"
    _check_keys(d, ("id", "role", "start", "speed", "policy", "sensing"), where, ("id", "role", "policy"))
    role = _str(d["role"], f"{where}.role")
    if role not in ROLES:
        raise ValidationError(f"{where}.role: unknown role {role!r}")
    start = d.get("start", "random")
    if start == "random":
        start = None
    else:
        start = _list(start, f"{where}.start")
        if len(start) != 2:
            raise ValidationError(f"{where}.start: expected [x, y] or \"random\"")
        if arena.kind == DISCRETE:
            start = (_int(start[0], f"{where}.start"), _int(start[1], f"{where}.start"))
        else:
            start = (float(_num(start[0], f"{where}.start")), float(_num(start[1], f"{where}.start")))
    policy = _policy(d["policy"], f"{where}.policy")
    policy.check_role(role, f"{where}.policy")
    sensing = _sensing(d["sensing"], f"{where}.sensing") if "sensing" in d else SensingModel()
    return AgentSpec(
        id=_int(d["id"], f"{where}.id"),
        role=role,
        start=start,
        speed=float(_num(d.get("speed", 1.0), f"{where}.speed")),
        policy=policy,
        sensing=sensing,
    )


def _hazards(d, arena: ArenaSpec) -> HazardField:
    _check_keys(d, ("barriers", "patches", "lethal"), "hazards")
    barriers = _region(d.get("barriers", []), arena, "hazards.barriers")
    patches = []
    for k, p in enumerate(_list(d.get("patches", []), "hazards.patches")):
        where = f"hazards.patches[{k}]"
        _check_keys(p, ("region", "factor", "duration", "roles"), where, ("region", "factor", "duration"))
        duration = p["duration"]
        duration = None if duration == _PERMANENT else _int(duration, f"{where}.duration")
        roles = frozenset(_str(r, f"{where}.roles") for r in _list(p.get("roles", list(ROLES)), f"{where}.roles"))
        if not roles <= set(ROLES):
            raise ValidationError(f"{where}.roles: unknown roles {sorted(roles - set(ROLES))}")
        try:
            patches.append(InjuryPatch(
                _region(p["region"], arena, f"{where}.region"),
                float(_num(p["factor"], f"{where}.factor")),
                duration,
                roles,
            ))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
    lethal = _region(d.get("lethal", []), arena, "hazards.lethal")
    return HazardField(barriers, tuple(patches), (lethal,) if lethal else ())


def _schedule(d, ids) -> ScheduleSpec:
    _check_keys(d, ("mode", "order", "periods"), "schedule")
    order = tuple(_int(i, "schedule.order") for i in _list(d.get("order", []), "schedule.order"))
    periods = []
    for k, pair in enumerate(_list(d.get("periods", []), "schedule.periods")):
        pair = _list(pair, f"schedule.periods[{k}]")
        if len(pair) != 2:
            raise ValidationError(f"schedule.periods[{k}]: expected [agent id, period]")
        periods.append((_int(pair[0], f"schedule.periods[{k}]"), _int(pair[1], f"schedule.periods[{k}]")))
    return ScheduleSpec(_str(d.get("mode", "synchronous"), "schedule.mode"), order, tuple(periods))


def scenario_from_dict(doc: Any) -> Scenario:
    """Build and validate a :class:`Scenario` from a decoded document."""
    _check_keys(doc, ("arena", "agents", "hazards", "rules", "mission", "schedule"), "", ("arena", "agents", "rules"))
    arena = _arena(doc["arena"])
    agents = tuple(_agent(a, k, arena) for k, a in enumerate(_list(doc["agents"], "agents")))
    rules = _check_keys(doc["rules"], ("capture", "tag_radius", "epsilon", "walls_assist", "t_max"), "rules", ("capture",))
    capture = CaptureRule(
        _str(rules["capture"], "rules.capture"),
        float(_num(rules.get("tag_radius", 1.0), "rules.tag_radius")),
        float(_num(rules.get("epsilon", 1.0), "rules.epsilon")),
        _bool(rules.get("walls_assist", False), "rules.walls_assist"),
    )
    m = _check_keys(doc.get("mission", {}), ("required", "decoys", "window"), "mission")
    prey = [a.id for a in agents if a.role == PREY]
    decoys = frozenset(_int(i, "mission.decoys") for i in _list(m.get("decoys", []), "mission.decoys"))
    if "required" in m:
        required = frozenset(_int(i, "mission.required") for i in _list(m["required"], "mission.required"))
    else:
        required = frozenset(prey) - decoys
    mission = MissionSpec(required, decoys, _opt_int(m.get("window"), "mission.window"), _opt_int(rules.get("t_max"), "rules.t_max"))
    hazards = _hazards(doc.get("hazards", {}), arena)
    schedule = _schedule(doc.get("schedule", {}), [a.id for a in agents])
    return Scenario(arena, agents, capture, mission, hazards, schedule)


def _load(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_scenario(path) -> Scenario:
    return scenario_from_dict(_load(path))


# ---------------------------------------------------------------- writing

def _num_out(v):
    return int(v) if isinstance(v, float) and v.is_integer() and abs(v) < 2 ** 53 else v


def _region_out(region: Region) -> list:
    if region.rects:
        return [list(r) for r in region.rects]
    return [list(c) for c in sorted(region.cells)]


def _sensing_out(s: SensingModel) -> dict:
    params: dict = {}
    default = SensingModel()
    if s.r != default.r:
        params["r"] = s.r
    if s.r_range is not None:
        params["r_range"] = list(s.r_range)
    if s.angle != default.angle:
        params["angle"] = s.angle
    if s.range != default.range and not math.isinf(s.range):
        params["range"] = s.range
    if s.detection_range:
        params["detection_range"] = dict(s.detection_range)
    out: dict = {"mode": s.mode}
    if params:
        out["params"] = params
    return out


def scenario_to_dict(sc: Scenario) -> dict:
    arena = sc.arena
    agents = []
    for a in sc.agents:
        d: dict = {"id": a.id, "role": a.role}
        if a.policy == PolicySpec(a.policy.kind):
            d["policy"] = a.policy.kind
        else:
            d["policy"] = {"kind": a.policy.kind, "salt": a.policy.salt, "headings": a.policy.headings}
        d["start"] = "random" if a.start is None else list(a.start)
        d["speed"] = a.speed
        if a.sensing != SensingModel():
            d["sensing"] = _sensing_out(a.sensing)
        agents.append(d)
    lethal = Region()
    for zone in sc.hazards.lethal:
        lethal = lethal | zone
    rules: dict = {
        "capture": sc.capture.mode,
        "tag_radius": sc.capture.radius,
        "epsilon": sc.capture.epsilon,
        "walls_assist": sc.capture.walls_assist,
    }
    if sc.mission.t_max is not None:
        rules["t_max"] = sc.mission.t_max
    return {
        "arena": {
            "kind": arena.kind,
            "width": _num_out(arena.width),
            "height": _num_out(arena.height),
            "topology": arena.topology,
            "allow_diagonal": arena.allow_diagonal,
        },
        "agents": agents,
        "hazards": {
            "barriers": _region_out(sc.hazards.barriers),
            "patches": [
                {
                    "region": _region_out(p.region),
                    "factor": p.factor,
                    "duration": _PERMANENT if p.duration is None else p.duration,
                    "roles": sorted(p.roles),
                }
                for p in sc.hazards.patches
            ],
            "lethal": _region_out(lethal),
        },
        "rules": rules,
        "mission": {
            "required": sorted(sc.mission.required_prey),
            "decoys": sorted(sc.mission.decoy_prey),
            "window": sc.mission.window_ticks,
        },
        "schedule": {
            "mode": sc.schedule.mode,
            "order": list(sc.schedule.order),
            "periods": [list(p) for p in sc.schedule.periods],
        },
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def write_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scenario_to_dict(sc)))


# ---------------------------------------------------------------- sweeps

_SWEEP_KEYS = (
    "scenario", "variable", "values", "replications", "base_seed", "mode", "multipliers",
    "decoy_policy", "hazard_kind", "patch_factor", "patch_duration", "min_capture_prob",
)


def sweep_from_dict(doc: Any, base_dir: str = ".") -> SweepSpec:
    """Build a :class:`SweepSpec`; ``scenario`` is an inline object or a path relative to ``base_dir``."""
    _check_keys(doc, _SWEEP_KEYS, "", ("scenario", "variable", "values", "replications"))
    base = doc["scenario"]
    if isinstance(base, str):
        base = _load(os.path.join(base_dir, base))
    scenario = scenario_from_dict(base)
    duration = doc.get("patch_duration", 10)
    return SweepSpec(
        base=scenario,
        variable=_str(doc["variable"], "variable"),
        values=tuple(_num(v, "values") for v in _list(doc["values"], "values")),
        replications=_int(doc["replications"], "replications"),
        base_seed=_int(doc.get("base_seed", 0), "base_seed"),
        velocity_mode=_str(doc.get("mode", "homogeneous"), "mode"),
        multipliers=tuple(float(_num(m, "multipliers")) for m in _list(doc.get("multipliers", []), "multipliers")),
        decoy_policy=_str(doc.get("decoy_policy", "none"), "decoy_policy"),
        hazard_kind=_str(doc.get("hazard_kind", "lethal"), "hazard_kind"),
        patch_factor=float(_num(doc.get("patch_factor", 0.5), "patch_factor")),
        patch_duration=None if duration == _PERMANENT else _int(duration, "patch_duration"),
        min_capture_prob=float(_num(doc.get("min_capture_prob", 0.5), "min_capture_prob")),
    )


def parse_sweep(path) -> SweepSpec:
    return sweep_from_dict(_load(path), os.path.dirname(os.path.abspath(path)))


def sweep_to_dict(spec: SweepSpec) -> dict:
    return {
        "scenario": scenario_to_dict(spec.base),
        "variable": spec.variable,
        "values": list(spec.values),
        "replications": spec.replications,
        "base_seed": spec.base_seed,
        "mode": spec.velocity_mode,
        "multipliers": list(spec.multipliers),
        "decoy_policy": spec.decoy_policy,
        "hazard_kind": spec.hazard_kind,
        "patch_factor": spec.patch_factor,
        "patch_duration": _PERMANENT if spec.patch_duration is None else spec.patch_duration,
        "min_capture_prob": spec.min_capture_prob,
    }
