"""Episode record files, trajectory replay checks, and board rendering.

A trajectory file is JSON lines. The first line is a header
``{"format", "seed", "scenario"}`` carrying the scenario document; each
following line is one tick::

    {"tick": t, "agents": [{"id", "role", "x", "y", "status"}],
     "events": [{"type", "agent", "prey", "tick"}]}

Continuous coordinates are printed with six decimals.
"""

from __future__ import annotations

import json
import os
from typing import List, Tuple

from .arena import DISCRETE, ArenaSpec
from .engine import EpisodeRecord, Scenario, TickSnapshot
from .errors import CorruptRecord, PursuitError
from .world import PREDATOR, REMOVED, ROLES, HazardField

TRAJECTORY_FORMAT = "pursuitsim-trajectory/1"
RECORD_FILE = "record.json"
TRAJECTORY_FILE = "trajectory.jsonl"

GLYPHS = {"predator": "P", "prey": "Y", "barrier": "#", "lethal": "*", "patch": "~", "empty": "."}


def frame_line(frame: TickSnapshot, discrete: bool) -> str:
    """One tick as a JSON line; continuous coordinates carry exactly six decimals."""
    agents = []
    for i, role, x, y, status in frame.agents:
        xs, ys = (str(int(x)), str(int(y))) if discrete else (f"{x:.6f}", f"{y:.6f}")
        agents.append(f'{{"id": {i}, "role": {json.dumps(role)}, "x": {xs}, "y": {ys}, "status": {json.dumps(status)}}}')
    events = ", ".join(json.dumps(e.to_dict()) for e in frame.events)
    return f'{{"tick": {frame.tick}, "agents": [{", ".join(agents)}], "events": [{events}]}}'


def trajectory_text(scenario: Scenario, record: EpisodeRecord) -> str:
    from .config import scenario_to_dict

    if record.trajectory is None:
        raise ValueError("record has no trajectory; run with record_trajectory=True")
    discrete = scenario.arena.kind == DISCRETE
    header = {"format": TRAJECTORY_FORMAT, "seed": record.seed, "scenario": scenario_to_dict(scenario)}
    lines = [json.dumps(header)]
    lines += [frame_line(f, discrete) for f in record.trajectory]
    return "\n".join(lines) + "\n"


def record_text(record: EpisodeRecord) -> str:
    doc = {
        "seed": record.seed,
        "outcome": record.outcome.to_dict(),
        "events": [e.to_dict() for e in record.event_log],
    }
    return json.dumps(doc, indent=2) + "\n"


def write_run(out_dir, scenario: Scenario, record: EpisodeRecord) -> List[str]:
    """Write ``record.json`` (and the trajectory when present); returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, RECORD_FILE)]
    with open(paths[0], "w", encoding="utf-8") as fh:
        fh.write(record_text(record))
    if record.trajectory is not None:
        paths.append(os.path.join(out_dir, TRAJECTORY_FILE))
        with open(paths[1], "w", encoding="utf-8") as fh:
            fh.write(trajectory_text(scenario, record))
    return paths


# ---------------------------------------------------------------- replay

_FRAME_KEYS = {"tick", "agents", "events"}
_AGENT_KEYS = {"id", "role", "x", "y", "status"}


def read_trajectory(path) -> Tuple[Scenario, List[dict]]:
    """Parse a trajectory file; malformed or truncated content raises :class:`CorruptRecord`."""
    from .config import scenario_from_dict

    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorruptRecord(f"{path}: cannot read: {exc.strerror}") from exc
    if not text:
        raise CorruptRecord(f"{path}: empty file")
    if not text.endswith("\n"):
        raise CorruptRecord(f"{path}: truncated (last line incomplete)")
    lines = text.split("\n")[:-1]
    docs = []
    for n, line in enumerate(lines, start=1):
        try:
            docs.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorruptRecord(f"{path}: line {n}: {exc.msg}") from exc
    header = docs[0]
    if not isinstance(header, dict) or header.get("format") != TRAJECTORY_FORMAT:
        raise CorruptRecord(f"{path}: line 1: missing trajectory header")
    try:
        scenario = scenario_from_dict(header.get("scenario"))
    except PursuitError as exc:
        raise CorruptRecord(f"{path}: line 1: bad scenario: {exc}") from exc
    frames = docs[1:]
    if not frames:
        raise CorruptRecord(f"{path}: no tick lines")
    for n, frame in enumerate(frames, start=2):
        if not isinstance(frame, dict) or set(frame) != _FRAME_KEYS:
            raise CorruptRecord(f"{path}: line {n}: expected keys {sorted(_FRAME_KEYS)}")
        if not isinstance(frame["agents"], list) or not isinstance(frame["events"], list):
            raise CorruptRecord(f"{path}: line {n}: agents and events must be lists")
        for a in frame["agents"]:
            if not isinstance(a, dict) or set(a) != _AGENT_KEYS:
                raise CorruptRecord(f"{path}: line {n}: agent entries need keys {sorted(_AGENT_KEYS)}")
    return scenario, frames


_PRINT_SLACK = 5e-7  # half a unit in the sixth printed decimal


def _in_bounds(arena: ArenaSpec, pos) -> bool:
    if arena.kind == DISCRETE:
        return all(isinstance(v, int) for v in pos) and arena.in_bounds(pos)
    x, y = pos
    return 0 <= x <= arena.width + _PRINT_SLACK and 0 <= y <= arena.height + _PRINT_SLACK


def validate_frames(scenario: Scenario, frames: List[dict]) -> List[str]:
    """Invariant violations over a recorded trajectory, each naming its tick."""
    arena = scenario.arena
    barriers = scenario.hazards.barriers
    problems = []
    ids = None
    removed = set()
    for k, frame in enumerate(frames):
        tick = frame["tick"]
        if tick != k:
            problems.append(f"tick {tick}: expected tick {k} in sequence")
        agents = frame["agents"]
        frame_ids = sorted(a["id"] for a in agents)
        if ids is None:
            ids = frame_ids
        elif frame_ids != ids:
            problems.append(f"tick {tick}: agent ids {frame_ids} differ from {ids}")
        occupied = {}
        for a in agents:
            pos = (a["x"], a["y"])
            if a["role"] not in ROLES:
                problems.append(f"tick {tick}: agent {a['id']} has unknown role {a['role']!r}")
            if a["id"] in removed and a["status"] != REMOVED:
                problems.append(f"tick {tick}: agent {a['id']} returned from removed status")
            if a["status"] == REMOVED:
                removed.add(a["id"])
                continue
            if not _in_bounds(arena, pos):
                problems.append(f"tick {tick}: agent {a['id']} at {list(pos)} outside arena")
                continue
            if arena.kind == DISCRETE:
                if pos in barriers:
                    problems.append(f"tick {tick}: agent {a['id']} inside barrier at {list(pos)}")
                if pos in occupied:
                    problems.append(f"tick {tick}: agents {occupied[pos]} and {a['id']} share cell {list(pos)}")
                occupied[pos] = a["id"]
    return problems


def render_board(arena: ArenaSpec, hazards: HazardField, frame: dict) -> str:
    """Text board for a discrete arena, highest row first."""
    grid = [[GLYPHS["empty"]] * arena.width for _ in range(arena.height)]
    for p in hazards.patches:
        for x, y in p.region.cells:
            grid[y][x] = GLYPHS["patch"]
    for zone in hazards.lethal:
        for x, y in zone.cells:
            grid[y][x] = GLYPHS["lethal"]
    for x, y in hazards.barriers.cells:
        grid[y][x] = GLYPHS["barrier"]
    for a in frame["agents"]:
        if a["status"] != REMOVED:
            grid[int(a["y"])][int(a["x"])] = GLYPHS["predator"] if a["role"] == PREDATOR else GLYPHS["prey"]
    return "\n".join("".join(row) for row in reversed(grid))
