"""Command-line entry points: serve, simulate, report, mock-hss."""

from __future__ import annotations

import argparse
import json
import logging
import os
import threading
import time
from pathlib import Path

from .analysis import write_report
from .errors import NoActiveTrips
from .scenario import Scenario, build_shared_corridor_scenario
from .service import FleetService, ServiceConfig, replay_trips
from .simulate import SimulationConfig, run_conference_day
from .solvers import (
    HttpTransport,
    RemoteSolverClient,
    brute_force_solve,
    remote_solve,
    simulated_annealing_solve,
    tabu_hybrid_solve,
)

log = logging.getLogger("qshuttle")

SOLVERS = ("brute", "sa", "tabu", "remote")


def make_solver(name: str, remote_url: str, timeout_ms: float):
    """(callable, tag) for a solver name from the CLI."""
    if name == "brute":
        return brute_force_solve, "brute"
    if name == "sa":
        return simulated_annealing_solve, "sa"
    if name == "tabu":
        return tabu_hybrid_solve, "tabu"
    if name == "remote":
        client = RemoteSolverClient(HttpTransport(remote_url, timeout_ms),
                                    timeout_ms)
        return (lambda req: remote_solve(client, req)), "remote"
    raise ValueError(f"unknown solver {name}")


def load_scenario(path: str | None, seed: int) -> Scenario:
    if path is not None:
        return Scenario.load(path)
    return build_shared_corridor_scenario(seed=seed)


def resolve_log_dir(arg: str | None) -> Path | None:
    raw = arg or os.environ.get("QSHUTTLE_LOG_DIR")
    if raw is None:
        return None
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


def parse_listen(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    return host or "127.0.0.1", int(port)


def add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario JSON file (default: built-in"
                        " shared-corridor scenario)")
    parser.add_argument("--solver", choices=SOLVERS, default="tabu")
    parser.add_argument("--remote-url", default="http://127.0.0.1:8001",
                        help="endpoint for --solver remote")
    parser.add_argument("--remote-timeout-ms", type=float, default=1000.0)
    parser.add_argument("--update-interval-s", type=float, default=30.0)
    parser.add_argument("--optimize-interval-s", type=float, default=120.0)
    parser.add_argument("--time-filter-s", type=float, default=120.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--log-dir", help="event log directory"
                        " (default: $QSHUTTLE_LOG_DIR)")


def build_service(args: argparse.Namespace) -> FleetService:
    scenario = load_scenario(args.scenario, args.seed)
    config = ServiceConfig(
        update_interval_s=args.update_interval_s,
        optimize_interval_s=args.optimize_interval_s,
        time_filter_s=args.time_filter_s,
        solver_seed=args.seed,
    )
    solver, tag = make_solver(args.solver, args.remote_url,
                              args.remote_timeout_ms)
    log_dir = resolve_log_dir(args.log_dir)
    log_path = None
    if log_dir is not None:
        scenario.save(log_dir / "scenario.json")
        log_path = log_dir / "events.jsonl"
    return FleetService(scenario, config=config, solver=solver,
                        solver_name=tag, log_path=log_path)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    service = build_service(args)
    app = create_app(service)

    def optimize_loop() -> None:
        while True:
            time.sleep(args.optimize_interval_s)
            try:
                outcome = service.handle_optimize()
                log.info("optimize: %d vars, %.0f ms, solver=%s",
                         outcome.problem_size, outcome.response_ms,
                         outcome.solver)
            except NoActiveTrips:
                pass
            except Exception:
                log.exception("scheduled optimization failed")

    threading.Thread(target=optimize_loop, daemon=True,
                     name="optimize-scheduler").start()
    host, port = parse_listen(args.listen)
    log.info("serving fleet service on %s:%d", host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, args.seed)
    solver, tag = make_solver(args.solver, args.remote_url,
                              args.remote_timeout_ms)
    config = ServiceConfig(
        update_interval_s=args.update_interval_s,
        optimize_interval_s=args.optimize_interval_s,
        time_filter_s=args.time_filter_s,
        solver_budget_ms=args.solver_budget_ms,
        solver_seed=args.seed,
    )
    log_dir = resolve_log_dir(args.log_dir)
    log_path = None
    if log_dir is not None:
        scenario.save(log_dir / "scenario.json")
        log_path = log_dir / "events.jsonl"
        if log_path.exists():
            log_path.unlink()
    started = time.perf_counter()
    result = run_conference_day(
        scenario, service_config=config,
        sim_config=SimulationConfig(
            update_interval_s=args.update_interval_s,
            optimize_interval_s=args.optimize_interval_s),
        solver=solver, solver_name=tag, log_path=log_path)
    wall = time.perf_counter() - started
    summary = {
        "wall_s": round(wall, 1),
        "optimization_rounds": result.rounds,
        "solver_fallback_rounds": result.fallback_rounds,
        "route_discontinuities": result.discontinuities,
        "trips_completed": len(result.ended_trips()),
    }
    print(json.dumps(summary, indent=1))
    if log_dir is not None:
        print(f"event log written to {log_dir / 'events.jsonl'}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    log_dir = Path(args.log)
    scenario = Scenario.load(log_dir / "scenario.json")
    with open(log_dir / "events.jsonl") as f:
        events = [json.loads(line) for line in f if line.strip()]
    trips = replay_trips(events, scenario.graph)
    summary = write_report(list(trips.values()), scenario, args.out)
    ended = sum(1 for t in trips.values()
                if t.state in ("ended-manual", "ended-auto"))
    print(f"replayed {len(trips)} trips ({ended} ended) from {log_dir}")
    for pair, stats in summary["pairs"].items():
        print(f"  {pair}: n={stats['count']} median={stats['median']:.3f}")
    print(f"report written to {args.out}")
    return 0


def cmd_mock_hss(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_mock_hss_app
    from .solvers import MockRemoteServer

    app = create_mock_hss_app(MockRemoteServer(
        latency_ms=args.latency_ms, failure_rate=args.failure_rate,
        seed=args.seed))
    host, port = parse_listen(args.listen)
    log.info("serving mock remote solver on %s:%d", host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qshuttle",
        description="Fleet navigation service with QUBO route de-confliction")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the fleet HTTP service")
    add_common_args(serve)
    serve.add_argument("--listen", default="127.0.0.1:8000")
    serve.set_defaults(func=cmd_serve)

    simulate = sub.add_parser("simulate", help="run a simulated service day")
    add_common_args(simulate)
    simulate.add_argument("--solver-budget-ms", type=float, default=25.0)
    simulate.set_defaults(func=cmd_simulate)

    report = sub.add_parser("report", help="build analysis reports from a log")
    report.add_argument("--log", required=True, help="event log directory")
    report.add_argument("--out", required=True, help="output directory")
    report.set_defaults(func=cmd_report)

    mock = sub.add_parser("mock-hss", help="run the mock remote solver")
    mock.add_argument("--listen", default="127.0.0.1:8001")
    mock.add_argument("--latency-ms", type=float, default=300.0)
    mock.add_argument("--failure-rate", type=float, default=0.0)
    mock.add_argument("--seed", type=int, default=0)
    mock.set_defaults(func=cmd_mock_hss)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
