#!/usr/bin/env python3
"""Emit a shared-corridor scenario file for `qshuttle serve --scenario`.

Example:
    python3 scripts/make_scenario.py --n-buses 9 --out scenario.json
"""

import argparse

from qshuttle.scenario import build_shared_corridor_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-buses", type=int, default=9)
    parser.add_argument("--n-parallel", type=int, default=3)
    parser.add_argument("--headway-s", type=float, default=60.0)
    parser.add_argument("--start-hour", type=float, default=8.0)
    parser.add_argument("--end-hour", type=float, default=18.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    scenario = build_shared_corridor_scenario(
        n_buses=args.n_buses, n_parallel=args.n_parallel,
        headway_s=args.headway_s, start_hour=args.start_hour,
        end_hour=args.end_hour, seed=args.seed)
    scenario.save(args.out)
    print(f"wrote {args.out}: {len(scenario.graph.nodes)} nodes,"
          f" {len(scenario.graph.edges)} edges, {len(scenario.fleet)} vehicles")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
