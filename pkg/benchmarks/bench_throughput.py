"""Throughput of the size-sweep scenario class across arena sizes.

    python3 benchmarks/bench_throughput.py --episodes 2000
"""

import argparse

from pursuitsim.bench import TARGET_AGENT_TICKS_PER_S, measure_throughput, size_sweep_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[5, 8, 11, 14, 17, 20])
    parser.add_argument("--episodes", type=int, default=2000)
    parser.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto")
    args = parser.parse_args()

    total_ticks = total_seconds = 0.0
    for size in args.sizes:
        res = measure_throughput(size_sweep_scenario(size), args.episodes, engine=args.engine)
        total_ticks += res.agent_ticks
        total_seconds += res.seconds
        print(f"L={size:3d}  {res.agent_ticks:>10d} agent-ticks  {res.seconds:7.3f} s  {res.rate:>12,.0f}/s")
    print(f"overall {total_ticks / total_seconds:,.0f} agent-ticks/s (target {TARGET_AGENT_TICKS_PER_S:,})")


if __name__ == "__main__":
    main()
