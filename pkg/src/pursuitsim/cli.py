"""Command-line front end: ``run``, ``sweep``, ``replay`` and ``bench``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import CorruptRecord, InvariantViolation, ParseError, PursuitError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_INVARIANT = 5
EXIT_CORRUPT = 6

SEED_ENV = "PURSUIT_DEFAULT_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _bool_flag(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise ValidationError(f"{SEED_ENV}: expected an integer, got {raw!r}") from None


def cmd_run(args) -> int:
    from .config import parse_scenario
    from .engine import run_episode
    from .records import write_run

    scenario = parse_scenario(args.scenario)
    seed = args.seed if args.seed is not None else _default_seed()
    record = run_episode(scenario, seed, record_trajectory=args.trajectories)
    write_run(args.out, scenario, record)
    o = record.outcome
    caps = " ".join(f"{k}@{v}" for k, v in sorted(o.capture_ticks.items())) or "none"
    print(f"seed {seed}: {o.result} at tick {o.final_tick}; captures {caps}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .config import parse_sweep
    from .experiments import format_summary, run_sweep

    spec = parse_sweep(args.sweep)
    result = run_sweep(spec, parallel=args.parallel)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "summary.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_summary(result))
    if args.records:
        with open(os.path.join(args.out, "episodes.jsonl"), "w", encoding="utf-8") as fh:
            for i, j, rec in result.episodes:
                doc = {"value": spec.values[i], "replication": j, "seed": rec.seed, "outcome": rec.outcome.to_dict()}
                fh.write(json.dumps(doc) + "\n")
    for row in result.rows:
        mean = "-" if row.mean_ticks is None else f"{row.mean_ticks:.2f}"
        print(f"{spec.variable}={row.value}: {row.captures}/{row.episodes} captured, mean ticks {mean}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_replay(args) -> int:
    from .arena import DISCRETE
    from .records import read_trajectory, render_board, validate_frames

    scenario, frames = read_trajectory(args.record)
    if scenario.arena.kind == DISCRETE and not args.quiet:
        for frame in frames:
            print(f"tick {frame['tick']}")
            print(render_board(scenario.arena, scenario.hazards, frame))
    problems = validate_frames(scenario, frames)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_INVARIANT
    print(f"{len(frames)} ticks replayed, no violations")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import TARGET_AGENT_TICKS_PER_S, measure_throughput, size_sweep_scenario
    from .config import parse_scenario

    scenario = parse_scenario(args.scenario) if args.scenario else size_sweep_scenario(args.size)
    res = measure_throughput(scenario, args.episodes, engine=args.engine)
    print(
        f"{res.episodes} episodes, {res.agent_ticks} agent-ticks in {res.seconds:.3f} s: "
        f"{res.rate:,.0f} agent-ticks/s (indicative target {TARGET_AGENT_TICKS_PER_S:,})"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pursuitsim", description="Deterministic pursuit-evasion simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one episode")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help=f"episode seed (default ${SEED_ENV} or 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trajectories", type=_bool_flag, nargs="?", const=True, default=False,
                   help="also write trajectory.jsonl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a Monte Carlo parameter sweep")
    p.add_argument("--sweep", required=True, help="sweep JSON file")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--records", action="store_true", help="also write per-episode outcomes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="check and render a recorded trajectory")
    p.add_argument("--record", required=True, help="trajectory.jsonl written by 'run --trajectories'")
    p.add_argument("--quiet", action="store_true", help="skip board rendering")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench", help="measure simulation throughput")
    p.add_argument("--scenario", help="scenario JSON file (default: greedy pursuit on an LxL grid)")
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CorruptRecord as exc:
        print(f"corrupt record: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except PursuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
