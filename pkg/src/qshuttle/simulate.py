"""Conference-day driver: schedules line trips on their headways, streams
telemetry to the fleet service on the update interval, runs optimization on
the optimize interval, and advances the moving fleet between rounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import NoActiveTrips, RouteDiscontinuity
from .scenario import Scenario
from .service import FleetService, ServiceConfig, TripRecord
from .solvers import tabu_hybrid_solve
from .traffic import SimClock, SimVehicle, TrafficState, reassign_route, step

END_OF_DAY_MARGIN_S = 1800.0  # stop launching trips half an hour before close
DISPLACEMENT_M = 2000.0
METERS_PER_DEG_LAT = 111_194.9


def deterministic_tabu(req):
    """Tabu with the budget taken as a pure flip budget (no wall guard), so a
    simulated day is a function of the scenario seed alone, not machine load."""
    return tabu_hybrid_solve(req, enforce_deadline=False)


@dataclass(frozen=True)
class SimulationConfig:
    tick_s: float = 5.0
    update_interval_s: float = 30.0
    optimize_interval_s: float = 120.0


@dataclass
class SimulationResult:
    service: FleetService
    trips: dict[str, TripRecord]
    rounds: int = 0
    fallback_rounds: int = 0
    unassigned_rounds: int = 0  # rounds where an active vehicle got no route
    discontinuities: int = 0

    def ended_trips(self) -> list[TripRecord]:
        return [t for t in self.trips.values()
                if t.state in ("ended-manual", "ended-auto")]


def run_conference_day(scenario: Scenario,
                       service_config: ServiceConfig | None = None,
                       sim_config: SimulationConfig = SimulationConfig(),
                       solver: Callable = deterministic_tabu,
                       solver_name: str = "tabu",
                       log_path=None) -> SimulationResult:
    """Simulate one service day and return the service with its trip records."""
    # generous per-round budget: every round reliably reaches the optimum, so
    # day-level results depend on the seed rather than machine load
    config = service_config or ServiceConfig(solver_budget_ms=60.0)
    clock = SimClock(0.0, sim_config.tick_s)
    traffic = TrafficState(scenario.graph)
    traffic.set_uniform_background(scenario.background_at(0.0))
    service = FleetService(scenario, config=config, traffic=traffic,
                           solver=solver, solver_name=solver_name,
                           clock=lambda: clock.now_s, log_path=log_path)
    vehicles = {vid: SimVehicle(vid, line)
                for vid, line in scenario.fleet.items()}
    by_line: dict[str, list[str]] = {}
    for vid, line in sorted(scenario.fleet.items()):
        by_line.setdefault(line, []).append(vid)
    # stagger line schedules so launches do not all collide on the same tick
    next_start = {line: 60.0 * i for i, line in enumerate(sorted(by_line))}
    result = SimulationResult(service=service, trips=service.trips)

    duration = scenario.duration_s()
    update_every = max(1, round(sim_config.update_interval_s / sim_config.tick_s))
    optimize_every = max(1, round(sim_config.optimize_interval_s / sim_config.tick_s))
    current_hour = None
    tick = 0

    def send_fixes() -> None:
        batch = [{"id": vid, "lat": veh.position().lat,
                  "lon": veh.position().lon, "ts": clock.now_s}
                 for vid, veh in sorted(vehicles.items())
                 if veh.state in ("en-route", "arrived") and veh.route is not None]
        if batch:
            service.handle_update(batch)
        for vid, veh in vehicles.items():
            if veh.route is not None and service.vehicles[vid].trip_id is None:
                veh.state = "idle"
                veh.route = None
                veh.progress_m = 0.0

    while clock.now_s < duration:
        hour = int(scenario.time_of_day_h(clock.now_s))
        if hour != current_hour:
            current_hour = hour
            traffic.set_uniform_background(scenario.background_at(clock.now_s))

        if clock.now_s < duration - END_OF_DAY_MARGIN_S:
            for line in sorted(by_line):
                while next_start[line] <= clock.now_s:
                    idle = [vid for vid in by_line[line]
                            if vehicles[vid].state == "idle"]
                    if not idle:
                        next_start[line] += scenario.lines[line].headway_s
                        break
                    vid = idle[0]
                    service.start_trip(vid)
                    veh = vehicles[vid]
                    veh.route = service.vehicles[vid].route
                    veh.progress_m = 0.0
                    veh.state = "en-route"
                    next_start[line] += scenario.lines[line].headway_s

        if tick % update_every == 0:
            send_fixes()

        if tick % optimize_every == 0:
            try:
                outcome = service.handle_optimize()
            except NoActiveTrips:
                outcome = None
            if outcome is not None:
                result.rounds += 1
                if outcome.fallback_used:
                    result.fallback_rounds += 1
                active = {vid for vid, veh in vehicles.items()
                          if veh.state == "en-route"
                          and service.vehicles[vid].trip_id is not None}
                if not active <= set(outcome.vehicles):
                    result.unassigned_rounds += 1
                for vid, out in outcome.vehicles.items():
                    veh = vehicles[vid]
                    if not out.changed or veh.state != "en-route":
                        continue
                    try:
                        reassign_route(veh, out.route)
                    except RouteDiscontinuity:
                        result.discontinuities += 1

        step(clock, list(vehicles.values()), traffic)
        tick += 1

    send_fixes()
    for trip in list(service.trips.values()):
        if trip.state == "active":
            service.end_trip(trip.trip_id)
    return result


def inject_anomalies(trips: list[TripRecord], fraction: float,
                     rng: random.Random) -> list[str]:
    """Corrupt a fraction of ended trips in place; returns affected trip ids.

    Half the victims get truncated histories (below the validity minimum),
    half get an origin displaced well beyond the endpoint tolerance.
    """
    from .geo import GeoPoint

    ended = [t for t in trips if t.state in ("ended-manual", "ended-auto")]
    count = int(round(fraction * len(ended)))
    victims = rng.sample(ended, count) if count else []
    for i, trip in enumerate(victims):
        if i % 2 == 0 and len(trip.history) >= 3:
            trip.history = trip.history[:3]
        else:
            ts, p = trip.history[0]
            shifted = GeoPoint(p.lat + DISPLACEMENT_M / METERS_PER_DEG_LAT, p.lon)
            trip.history[0] = (ts, shifted)
    return [t.trip_id for t in victims]
