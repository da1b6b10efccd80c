"""Compiled episode loop for the plain-grid scenario class.

Covers discrete arenas without hazards, synchronous schedules, omniscient
sensing, and the stationary / random-walk / greedy / evasive policies. It
reproduces :func:`pursuitsim.engine.run_episode_python` exactly (same RNG
streams, same phase order, same tie-breaks); the test suite checks the two
against each other. Trajectories are never recorded here.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .arena import DISCRETE
from .capture import PROXIMITY, SURROUND4, TAG, EpisodeOutcome
from .engine import CREDIT_EPS, MAX_SPAWN_ATTEMPTS, EpisodeRecord, Event, Scenario
from .errors import ScenarioInvalid
from .perception import OMNISCIENT
from .policies import EVASIVE, GREEDY_PURSUIT, RANDOM_WALK, STATIONARY
from .rng import GAMMA, SPAWN_TAG, agent_stream_tag

_POLICY_CODES = {STATIONARY: 0, RANDOM_WALK: 1, GREEDY_PURSUIT: 2, EVASIVE: 3}
_CAPTURE_CODES = {SURROUND4: 0, TAG: 1, PROXIMITY: 2}
_RESULTS = ("success", "timeout", "window_missed")

_G = np.uint64(GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)

# Action offsets in tie-break order: Stay, Up, Down, Left, Right, UL, UR, DL, DR.
_DX = np.array([0, 0, 0, -1, 1, -1, 1, -1, 1], dtype=np.int64)
_DY = np.array([0, 1, -1, 0, 0, 1, 1, -1, -1], dtype=np.int64)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _next(states, k):
    states[k] = states[k] + _G
    return _mix64(states[k])


@njit(cache=True)
def _below(states, k, n):
    return np.int64(((_next(states, k) >> _S32) * np.uint64(n)) >> _S32)


@njit(cache=True)
def _axis(a, b, extent, toroidal):
    d = abs(a - b)
    if toroidal and extent - d < d:
        return extent - d
    return d


@njit(cache=True)
def _dist(ax, ay, bx, by, W, H, toroidal, diag):
    dx = _axis(ax, bx, W, toroidal)
    dy = _axis(ay, by, H, toroidal)
    if diag:
        return max(dx, dy)
    return dx + dy


@njit(cache=True)
def _sq(ax, ay, bx, by, W, H, toroidal):
    dx = _axis(ax, bx, W, toroidal)
    dy = _axis(ay, by, H, toroidal)
    return dx * dx + dy * dy


@njit(cache=True)
def _dest(x, y, a, W, H, toroidal):
    nx = x + _DX[a]
    ny = y + _DY[a]
    if toroidal:
        return nx % W, ny % H, True
    if nx < 0 or nx >= W or ny < 0 or ny >= H:
        return -1, -1, False
    return nx, ny, True


@njit(cache=True)
def _surrounded(p, px, py, occ, role, W, H, toroidal):
    found = np.empty(4, dtype=np.int64)
    nfound = 0
    for a in range(1, 5):
        cx, cy, ok = _dest(px, py, a, W, H, toroidal)
        if not ok or (cx == px and cy == py):
            return False
        j = occ[cy * W + cx]
        if j < 0 or role[j] != 0:
            return False
        dup = False
        for k in range(nfound):
            if found[k] == j:
                dup = True
        if not dup:
            found[nfound] = j
            nfound += 1
    return nfound == 4


@njit(cache=True)
def _tagger(p, xs, ys, role, n, W, H, toroidal, diag, mode, radius, eps):
    for j in range(n):
        if role[j] != 0:
            continue
        d = _dist(xs[j], ys[j], xs[p], ys[p], W, H, toroidal, diag)
        if mode == 2:
            if d < eps:
                return j
        elif d <= radius:
            return j
    return -1


@njit(cache=True)
def _check_captures(tick, xs, ys, occ, role, captured, cap_tick, cap_by, n, W, H, toroidal, diag, mode, radius, eps):
    for p in range(n):
        if role[p] != 1 or captured[p]:
            continue
        if mode == 0:
            hit = _surrounded(p, xs[p], ys[p], occ, role, W, H, toroidal)
            by = -1
        else:
            by = _tagger(p, xs, ys, role, n, W, H, toroidal, diag, mode, radius, eps)
            hit = by >= 0
        if hit:
            captured[p] = True
            cap_tick[p] = tick
            cap_by[p] = by


@njit(cache=True)
def _status(tick, cap_tick, required, n, window, t_max):
    """0 success, 1 timeout, 2 window missed, -1 in progress."""
    done = -1
    complete = True
    for p in range(n):
        if required[p]:
            if cap_tick[p] < 0:
                complete = False
                break
            if cap_tick[p] > done:
                done = cap_tick[p]
    if complete:
        if window < 0 or done <= window:
            return 0
        return 2
    if tick >= t_max:
        if window >= 0 and tick > window:
            return 2
        return 1
    return -1


@njit(cache=True)
def _episode(seed, W, H, toroidal, diag, role, policy, speed, fx, fy, tags, required,
             mode, radius, eps, window, t_max, max_attempts, credit_eps, spawn_tag,
             cap_tick, cap_by):
    n = role.shape[0]
    seed = np.uint64(seed)
    states = np.empty(n, dtype=np.uint64)
    for i in range(n):
        states[i] = _mix64(seed ^ _mix64(tags[i] + _G))
    spawn = np.empty(1, dtype=np.uint64)
    spawn[0] = _mix64(seed ^ _mix64(np.uint64(spawn_tag) + _G))

    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    occ = np.full(W * H, -1, dtype=np.int64)
    captured = np.zeros(n, dtype=np.bool_)
    fixed_cell = np.zeros(W * H, dtype=np.bool_)
    for i in range(n):
        if fx[i] >= 0:
            fixed_cell[fy[i] * W + fx[i]] = True
    free = np.empty(W * H, dtype=np.int64)

    accepted = False
    for _attempt in range(max_attempts):
        nfree = 0
        for c in range(W * H):
            if not fixed_cell[c]:
                free[nfree] = c
                nfree += 1
        for c in range(W * H):
            occ[c] = -1
        for i in range(n):
            if fx[i] >= 0:
                xs[i] = fx[i]
                ys[i] = fy[i]
            else:
                k = _below(spawn, 0, nfree)
                c = free[k]
                for m in range(k, nfree - 1):
                    free[m] = free[m + 1]
                nfree -= 1
                xs[i] = c % W
                ys[i] = c // W
            occ[ys[i] * W + xs[i]] = i
        for i in range(n):
            captured[i] = False
            cap_tick[i] = -1
            cap_by[i] = -1
        _check_captures(0, xs, ys, occ, role, captured, cap_tick, cap_by, n, W, H, toroidal, diag, mode, radius, eps)
        involves = False
        for p in range(n):
            if cap_tick[p] < 0:
                continue
            if fx[p] < 0 or (cap_by[p] >= 0 and fx[cap_by[p]] < 0):
                involves = True
            if mode == 0:
                for a in range(1, 5):
                    cx, cy, ok = _dest(xs[p], ys[p], a, W, H, toroidal)
                    if ok:
                        j = occ[cy * W + cx]
                        if j >= 0 and fx[j] < 0:
                            involves = True
        if not involves:
            accepted = True
            break
    if not accepted:
        return -1, 0

    tick = 0
    st = _status(tick, cap_tick, required, n, window, t_max)
    credit = np.zeros(n, dtype=np.float64)
    steps = np.zeros(n, dtype=np.int64)
    prop = np.empty(n, dtype=np.int64)
    legal = np.empty(9, dtype=np.int64)
    lx = np.empty(9, dtype=np.int64)
    ly = np.empty(9, dtype=np.int64)
    nact = 9 if diag else 5
    taken = np.zeros(W * H, dtype=np.bool_)
    while st < 0:
        maxr = 0
        for i in range(n):
            steps[i] = 0
            if role[i] == 1 and captured[i]:
                continue
            c = credit[i] + speed[i]
            whole = np.int64(np.floor(c + credit_eps))
            c = c - whole
            credit[i] = c if c > 0.0 else 0.0
            steps[i] = whole
            if whole > maxr:
                maxr = whole
        for r in range(maxr):
            for i in range(n):
                prop[i] = -1
                if steps[i] <= r:
                    continue
                x = xs[i]
                y = ys[i]
                nl = 1
                legal[0] = 0
                lx[0] = x
                ly[0] = y
                for a in range(1, nact):
                    dx, dy, ok = _dest(x, y, a, W, H, toroidal)
                    if not ok or occ[dy * W + dx] >= 0:
                        continue
                    seen = False
                    for m in range(nl):
                        if lx[m] == dx and ly[m] == dy:
                            seen = True
                    if seen:
                        continue
                    legal[nl] = a
                    lx[nl] = dx
                    ly[nl] = dy
                    nl += 1
                pol = policy[i]
                choice = 0
                if pol == 1:
                    choice = _below(states, i, nl)
                elif pol == 2:
                    tgt = -1
                    td = 0
                    for j in range(n):
                        if j == i or role[j] != 1 or captured[j]:
                            continue
                        d = _dist(x, y, xs[j], ys[j], W, H, toroidal, diag)
                        if tgt < 0 or d < td:
                            tgt = j
                            td = d
                    if tgt >= 0:
                        bd = -1
                        be = -1
                        for m in range(nl):
                            d = _dist(lx[m], ly[m], xs[tgt], ys[tgt], W, H, toroidal, diag)
                            e = _sq(lx[m], ly[m], xs[tgt], ys[tgt], W, H, toroidal)
                            if bd < 0 or d < bd or (d == bd and e < be):
                                bd = d
                                be = e
                                choice = m
                elif pol == 3:
                    has = False
                    for j in range(n):
                        if j != i and role[j] == 0:
                            has = True
                    if has:
                        bd = -1
                        be = -1
                        for m in range(nl):
                            md = -1
                            me = -1
                            for j in range(n):
                                if j == i or role[j] != 0:
                                    continue
                                d = _dist(lx[m], ly[m], xs[j], ys[j], W, H, toroidal, diag)
                                e = _sq(lx[m], ly[m], xs[j], ys[j], W, H, toroidal)
                                if md < 0 or d < md:
                                    md = d
                                if me < 0 or e < me:
                                    me = e
                            if bd < 0 or md > bd or (md == bd and me > be):
                                bd = md
                                be = me
                                choice = m
                if choice > 0:
                    prop[i] = ly[choice] * W + lx[choice]
            for c in range(W * H):
                taken[c] = occ[c] >= 0
            for i in range(n):
                t = prop[i]
                if t < 0 or taken[t]:
                    continue
                taken[ys[i] * W + xs[i]] = False
                taken[t] = True
                xs[i] = t % W
                ys[i] = t // W
            for c in range(W * H):
                occ[c] = -1
            for i in range(n):
                occ[ys[i] * W + xs[i]] = i
        tick += 1
        _check_captures(tick, xs, ys, occ, role, captured, cap_tick, cap_by, n, W, H, toroidal, diag, mode, radius, eps)
        st = _status(tick, cap_tick, required, n, window, t_max)
    return st, tick


@njit(cache=True)
def _batch(seeds, W, H, toroidal, diag, role, policy, speed, fx, fy, tags, required,
           mode, radius, eps, window, t_max, max_attempts, credit_eps, spawn_tag,
           results, finals, cap_ticks, cap_bys):
    for e in range(seeds.shape[0]):
        st, tick = _episode(seeds[e], W, H, toroidal, diag, role, policy, speed, fx, fy, tags, required,
                            mode, radius, eps, window, t_max, max_attempts, credit_eps, spawn_tag,
                            cap_ticks[e], cap_bys[e])
        results[e] = st
        finals[e] = tick


def supports(scenario: Scenario) -> bool:
    """True when ``scenario`` falls in the compiled kernel's class."""
    arena = scenario.arena
    if arena.kind != DISCRETE or not scenario.hazards.empty:
        return False
    if scenario.schedule.mode != "synchronous":
        return False
    if scenario.capture.walls_assist:
        return False
    for a in scenario.agents:
        if a.policy.kind not in _POLICY_CODES:
            return False
        if a.sensing.mode != OMNISCIENT or a.sensing.detection_range:
            return False
    n_random = sum(a.start is None for a in scenario.agents)
    n_fixed = len(scenario.agents) - n_random
    return arena.width * arena.height - n_fixed >= n_random


def _pack(sc: Scenario) -> dict:
    agents = sc.agents
    mission = sc.mission
    return dict(
        W=int(sc.arena.width),
        H=int(sc.arena.height),
        toroidal=sc.arena.toroidal,
        diag=sc.arena.allow_diagonal,
        role=np.array([0 if a.role == "predator" else 1 for a in agents], dtype=np.int8),
        policy=np.array([_POLICY_CODES[a.policy.kind] for a in agents], dtype=np.int64),
        speed=np.array([float(a.speed) for a in agents], dtype=np.float64),
        fx=np.array([-1 if a.start is None else int(a.start[0]) for a in agents], dtype=np.int64),
        fy=np.array([-1 if a.start is None else int(a.start[1]) for a in agents], dtype=np.int64),
        tags=np.array([agent_stream_tag(a.id, a.policy.salt) for a in agents], dtype=np.uint64),
        required=np.array([a.id in mission.required_prey for a in agents], dtype=np.bool_),
        mode=_CAPTURE_CODES[sc.capture.mode],
        radius=float(sc.capture.radius),
        eps=float(sc.capture.epsilon),
        window=-1 if mission.window_ticks is None else int(mission.window_ticks),
        t_max=int(sc.t_max),
        max_attempts=MAX_SPAWN_ATTEMPTS,
        credit_eps=CREDIT_EPS,
        spawn_tag=np.uint64(SPAWN_TAG),
    )


def run_batch_compiled(scenario: Scenario, seeds) -> list:
    """Run one episode per seed; returns EpisodeRecords in seed order."""
    if not supports(scenario):
        raise ScenarioInvalid("engine: scenario is outside the compiled kernel's class")
    packed = _pack(scenario)
    seeds = [int(s) for s in seeds]
    m = len(seeds)
    n = len(scenario.agents)
    results = np.empty(m, dtype=np.int64)
    finals = np.empty(m, dtype=np.int64)
    cap_ticks = np.empty((m, n), dtype=np.int64)
    cap_bys = np.empty((m, n), dtype=np.int64)
    _batch(np.array(seeds, dtype=np.uint64), *packed.values(), results, finals, cap_ticks, cap_bys)
    ids = [a.id for a in scenario.agents]
    records = []
    for e, seed in enumerate(seeds):
        if results[e] < 0:
            raise ScenarioInvalid(
                f"agents.start: random spawn overlapped a capture or hazard {MAX_SPAWN_ATTEMPTS} times in a row"
            )
        captures = sorted((int(cap_ticks[e, i]), ids[i], int(cap_bys[e, i])) for i in range(n) if cap_ticks[e, i] >= 0)
        events = [Event("capture", t, None if by < 0 else ids[by], pid) for t, pid, by in captures]
        outcome = EpisodeOutcome(_RESULTS[results[e]], {pid: t for t, pid, _ in captures}, int(finals[e]), [])
        records.append(EpisodeRecord(outcome, seed, None, events))
    return records


def run_episode_compiled(scenario: Scenario, seed: int) -> EpisodeRecord:
    return run_batch_compiled(scenario, [seed])[0]
