#!/usr/bin/env python3
"""Benchmark the solvers on random route-selection instances.

Reports optimality rate against brute force and mean wall time per solve.

Example:
    python3 scripts/compare_solvers.py --instances 100 --max-vars 12
"""

import argparse
import random
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from conftest import random_tfo_instance  # noqa: E402

from qshuttle.qubo import build_tfo_qubo  # noqa: E402
from qshuttle.solvers import (  # noqa: E402
    SolveRequest,
    brute_force_solve,
    simulated_annealing_solve,
    tabu_hybrid_solve,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=100)
    parser.add_argument("--max-vars", type=int, default=12)
    parser.add_argument("--budget-ms", type=float, default=100.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    solvers = {"sa": simulated_annealing_solve, "tabu": tabu_hybrid_solve}
    hits = {tag: 0 for tag in solvers}
    walls = {tag: [] for tag in solvers}

    for _ in range(args.instances):
        routes = random_tfo_instance(rng, max_vars=args.max_vars)
        bqm, _, _ = build_tfo_qubo(routes)
        optimal = brute_force_solve(
            SolveRequest(bqm, budget_ms=args.budget_ms)).energy
        for tag, solver in solvers.items():
            res = solver(SolveRequest(bqm, budget_ms=args.budget_ms,
                                      seed=args.seed))
            if abs(res.energy - optimal) <= 1e-9:
                hits[tag] += 1
            walls[tag].append(res.wall_time_ms)

    for tag in solvers:
        print(f"{tag:5s} optimal {hits[tag]}/{args.instances}"
              f" mean wall {statistics.mean(walls[tag]):.1f} ms"
              f" max {max(walls[tag]):.1f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
