#!/usr/bin/env python3
"""Run a full simulated service day and report overlap statistics.

Example:
    python3 scripts/run_conference_day.py --n-buses 9 --out day-report/
"""

import argparse
import time
from pathlib import Path

from qshuttle.analysis import (
    fleet_overlap_report,
    static_baseline_overlap,
    summarize_observations,
    write_report,
)
from qshuttle.scenario import build_shared_corridor_scenario
from qshuttle.simulate import run_conference_day


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-buses", type=int, default=9)
    parser.add_argument("--headway-s", type=float, default=60.0)
    parser.add_argument("--end-hour", type=float, default=18.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", help="directory for trips.csv / overlap.csv /"
                        " overlap_summary.json")
    args = parser.parse_args()

    scenario = build_shared_corridor_scenario(
        n_buses=args.n_buses, headway_s=args.headway_s,
        end_hour=args.end_hour, seed=args.seed)
    started = time.perf_counter()
    result = run_conference_day(scenario)
    wall = time.perf_counter() - started

    trips = result.ended_trips()
    print(f"day simulated in {wall:.1f}s: {result.rounds} optimization rounds,"
          f" {len(trips)} trips,"
          f" {result.fallback_rounds} solver-fallback rounds,"
          f" {result.discontinuities} route discontinuities")

    baseline = static_baseline_overlap(scenario)
    print(f"static baseline red->blue {baseline['red->blue']:.3f},"
          f" blue->red {baseline['blue->red']:.3f}")

    summary = summarize_observations(fleet_overlap_report(trips))
    for pair, stats in summary.items():
        print(f"  {pair:12s} n={stats['count']:4d} median={stats['median']:.3f}"
              f" mean={stats['mean']:.3f} q3={stats['q3']:.3f}")

    if args.out:
        write_report(trips, scenario, Path(args.out))
        print(f"report written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
