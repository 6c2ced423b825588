"""Fleet navigation service: telemetry ingestion, projected locations,
optimization rounds, trip lifecycle, exclusion management, and persistence.

Location updates and optimization are strictly separated: handle_update never
routes or solves, and optimization rounds are single-flight with coalescing.
All state survives in an append-only JSONL event log that replays to identical
trip records.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .errors import (
    NoActiveTrip,
    NoActiveTrips,
    NoRouteFound,
    OffRoute,
    SnapFailure,
    StaleTimestamp,
    UnknownVehicle,
    VehicleBusy,
)
from .geo import (
    GeoPoint,
    BoundingBox,
    cumulative_lengths,
    haversine_distance,
    point_at_arc,
    point_to_polyline_distance,
    resample_polyline,
)
from .qubo import Assignment, QuboConfig, build_tfo_qubo
from .routing import CandidateRoute, candidate_routes, time_filter
from .scenario import Scenario
from .solvers import SolveRequest, solve_with_fallback, tabu_hybrid_solve
from .traffic import TrafficState

PROJECTION_RESAMPLE_M = 25.0


@dataclass(frozen=True)
class ServiceConfig:
    update_interval_s: float = 30.0
    optimize_interval_s: float = 120.0
    time_filter_s: float = 120.0
    projection_horizon_s: float = 120.0  # one optimization interval ahead
    off_route_tolerance_m: float = 200.0
    auto_end_radius_m: float = 15.0
    duration_radius_m: float = 50.0  # trip-duration recording, distinct from auto-end
    k_routes: int = 3
    solver_budget_ms: float = 100.0
    # constant across rounds: a fixed seed plus lexicographic tie-breaking keeps
    # repeated optimizations over frozen state from flapping between ties
    solver_seed: int = 0


@dataclass
class TripRecord:
    trip_id: str
    vehicle_id: str
    line: str
    origin: GeoPoint
    destination: GeoPoint
    state: str = "pending"  # pending | active | ended-manual | ended-auto
    start_ts: float | None = None
    end_ts: float | None = None
    history: list[tuple[float, GeoPoint]] = field(default_factory=list)
    route_history: list[tuple[float, CandidateRoute, str, bool]] = field(
        default_factory=list)

    def activate(self, ts: float) -> None:
        if self.state != "pending":
            raise ValueError(f"cannot activate trip in state {self.state}")
        self.state = "active"
        self.start_ts = ts

    def end(self, ts: float, manual: bool) -> None:
        if self.state != "active":
            raise NoActiveTrip(f"trip {self.trip_id} is {self.state}")
        self.state = "ended-manual" if manual else "ended-auto"
        self.end_ts = ts

    def duration_s(self, recording_radius_m: float) -> float:
        """Elapsed time from start until first fix within the recording radius
        of the destination; falls back to the full start-to-end span."""
        assert self.start_ts is not None and self.end_ts is not None
        for ts, p in self.history:
            if haversine_distance(p, self.destination) <= recording_radius_m:
                return max(0.0, ts - self.start_ts)
        return self.end_ts - self.start_ts


def classify_trip(trip: TripRecord, expected_origin: GeoPoint,
                  expected_destination: GeoPoint,
                  max_endpoint_error_m: float = 1000.0,
                  min_points: int = 5) -> tuple[bool, str | None]:
    """(valid, reason): invalid on a short history or a displaced endpoint."""
    if trip.state not in ("ended-manual", "ended-auto"):
        raise ValueError("trip must be ended before classification")
    if len(trip.history) < min_points:
        return False, "too-few-points"
    first = trip.history[0][1]
    last = trip.history[-1][1]
    if haversine_distance(first, expected_origin) > max_endpoint_error_m:
        return False, "displaced-endpoint"
    if haversine_distance(last, expected_destination) > max_endpoint_error_m:
        return False, "displaced-endpoint"
    return True, None


def suffix_compatible(previous: tuple[str, ...], nxt: tuple[str, ...]) -> bool:
    """True when nxt equals previous after dropping an already-passed prefix."""
    if len(nxt) > len(previous):
        return False
    return previous[len(previous) - len(nxt):] == nxt


def diff_routes(previous: CandidateRoute | None, nxt: CandidateRoute,
                projected: GeoPoint | None = None
                ) -> tuple[bool, CandidateRoute]:
    """Changed flag plus the next route trimmed to start near the vehicle.

    changed is false iff nxt's node path is a suffix-compatible continuation
    of previous. The trimmed route drops vertices behind the projected
    location, always keeping at least two nodes.
    """
    changed = previous is None or not suffix_compatible(previous.node_path,
                                                        nxt.node_path)
    trimmed = nxt
    if projected is not None:
        best_i, best_d = 0, float("inf")
        for i, vertex in enumerate(nxt.polyline):
            d = haversine_distance(projected, vertex)
            if d < best_d:
                best_i, best_d = i, d
        cut = min(best_i, len(nxt.node_path) - 2)
        if cut > 0:
            trimmed = CandidateRoute(nxt.vehicle_id, nxt.route_index,
                                     nxt.node_path[cut:], nxt.polyline[cut:],
                                     nxt.expected_travel_time_s)
    return changed, trimmed


def splice_routes(previous: CandidateRoute | None, nxt: CandidateRoute,
                  traffic: TrafficState) -> CandidateRoute:
    """Extend nxt backwards with the still-relevant prefix of previous.

    Optimization routes start at the projected origin, ahead of the vehicle;
    the stored assignment keeps the portion of the previous route leading up
    to that point so the live fix stays on the assigned polyline. Falls back
    to nxt unchanged when no loopless splice exists.
    """
    if previous is None:
        return nxt
    nxt_pos = {n: k for k, n in reversed(list(enumerate(nxt.node_path)))}
    meet = next((i for i, n in enumerate(previous.node_path) if n in nxt_pos),
                None)
    if meet is None:
        return nxt
    keep = nxt_pos[previous.node_path[meet]]
    combined = previous.node_path[:meet] + nxt.node_path[keep:]
    if meet == 0 and keep == 0:
        return nxt
    if len(set(combined)) != len(combined):
        return nxt
    polyline = previous.polyline[:meet] + nxt.polyline[keep:]
    return CandidateRoute(nxt.vehicle_id, nxt.route_index, combined, polyline,
                          traffic.path_time(list(combined)))


@dataclass
class VehicleState:
    vehicle_id: str
    line: str
    live: GeoPoint | None = None
    live_ts: float | None = None
    route: CandidateRoute | None = None
    trip_id: str | None = None


@dataclass(frozen=True)
class VehicleOutcome:
    vehicle_id: str
    route: CandidateRoute
    changed: bool
    eta_s: float
    fallback: bool


@dataclass(frozen=True)
class OptimizeOutcome:
    vehicles: dict[str, VehicleOutcome]
    problem_size: int
    response_ms: float
    fallback_used: bool  # solver failed or decoded infeasible this round
    solver: str
    ts: float
    # vehicles kept on their previous/static route because no fresh candidates
    # existed (e.g. projected origin already at the destination)
    degraded: tuple[str, ...] = ()


class EventLog:
    """Append-only JSONL event log, optionally mirrored to disk."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[dict] = []
        if self.path is not None and self.path.exists():
            with open(self.path) as f:
                self.events = [json.loads(line) for line in f if line.strip()]

    def append(self, event: dict) -> None:
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a") as f:
                f.write(json.dumps(event) + "\n")


def replay_trips(events: list[dict], graph) -> dict[str, TripRecord]:
    """Reconstruct trip records from an event stream."""
    trips: dict[str, TripRecord] = {}
    for ev in events:
        kind = ev["event"]
        if kind == "trip_start":
            trip = TripRecord(
                trip_id=ev["trip_id"], vehicle_id=ev["vehicle_id"],
                line=ev["line"],
                origin=GeoPoint(ev["origin"]["lat"], ev["origin"]["lon"]),
                destination=GeoPoint(ev["destination"]["lat"],
                                     ev["destination"]["lon"]))
            trip.activate(ev["ts"])
            trips[trip.trip_id] = trip
        elif kind == "location":
            if ev.get("trip_id") in trips:
                trips[ev["trip_id"]].history.append(
                    (ev["ts"], GeoPoint(ev["lat"], ev["lon"])))
        elif kind == "route_assigned":
            trip = trips[ev["trip_id"]]
            path = tuple(ev["node_path"])
            route = CandidateRoute(trip.vehicle_id, ev["route_index"], path,
                                   tuple(graph.polyline_for(list(path))),
                                   ev["travel_time_s"])
            trip.route_history.append(
                (ev["ts"], route, ev["solver"], ev["fallback"]))
        elif kind == "trip_end":
            trips[ev["trip_id"]].end(ev["ts"], manual=ev["manual"])
    return trips


class FleetService:
    """Serialized fleet-state owner: one writer lock, single-flight optimizer."""

    def __init__(self, scenario: Scenario, config: ServiceConfig = ServiceConfig(),
                 traffic: TrafficState | None = None,
                 solver: Callable = tabu_hybrid_solve,
                 solver_name: str = "tabu",
                 clock: Callable[[], float] = time.time,
                 log_path: str | Path | None = None):
        self.scenario = scenario
        self.config = config
        self.traffic = traffic if traffic is not None else TrafficState(scenario.graph)
        self.solver = solver
        self.solver_name = solver_name
        self.clock = clock
        self.log = EventLog(log_path)
        self.vehicles: dict[str, VehicleState] = {
            vid: VehicleState(vid, line) for vid, line in scenario.fleet.items()
        }
        self.trips: dict[str, TripRecord] = {}
        self.exclusions: dict[str, BoundingBox] = {}
        self.counters = {"updates": 0, "stale_dropped": 0, "routing_calls": 0,
                         "solve_calls": 0, "optimizations": 0, "coalesced": 0}
        self.last_optimize_ts: float | None = None
        self._trip_seq = 0
        self._exclusion_seq = 0
        self._last_outcome: OptimizeOutcome | None = None
        self._state_lock = threading.Lock()
        self._optimize_lock = threading.Lock()
        self._coalesce_requested = False
        # static per-line fallback routes under zero load, ignoring exclusions
        self.static_routes: dict[str, CandidateRoute] = {
            name: self._static_route(name) for name in scenario.lines
        }

    def _static_route(self, line: str) -> CandidateRoute:
        free_flow = TrafficState(self.scenario.graph)
        routes = candidate_routes(self.scenario.graph, free_flow,
                                  self.scenario.line_origin(line),
                                  self.scenario.line_destination(line), k=1)
        return routes[0]

    # --- telemetry ---------------------------------------------------------

    def handle_update(self, batch: list[dict]) -> dict:
        """Ingest live locations; appends to active trips, never optimizes."""
        for point in batch:
            if point["id"] not in self.vehicles:
                raise UnknownVehicle(f"unknown vehicle {point['id']}")
        accepted = 0
        dropped: list[str] = []
        with self._state_lock:
            for point in batch:
                veh = self.vehicles[point["id"]]
                ts = float(point["ts"])
                if veh.live_ts is not None and ts < veh.live_ts:
                    self.counters["stale_dropped"] += 1
                    dropped.append(veh.vehicle_id)
                    continue
                veh.live = GeoPoint(point["lat"], point["lon"])
                veh.live_ts = ts
                accepted += 1
                self.counters["updates"] += 1
                self.log.append({"event": "location", "ts": ts,
                                 "vehicle_id": veh.vehicle_id,
                                 "lat": veh.live.lat, "lon": veh.live.lon,
                                 "trip_id": veh.trip_id})
                if veh.trip_id is not None:
                    self.trips[veh.trip_id].history.append((ts, veh.live))
        for point in batch:
            self.auto_end_check(point["id"])
        return {"accepted": accepted, "dropped": dropped}

    # --- projection --------------------------------------------------------

    def project_location(self, vehicle_id: str,
                         horizon_s: float | None = None) -> GeoPoint:
        """Vertex of the resampled assigned polyline one horizon ahead.

        Raises OffRoute when the live fix is beyond the off-route tolerance.
        """
        if horizon_s is None:
            horizon_s = self.config.projection_horizon_s
        veh = self.vehicles[vehicle_id]
        if veh.route is None or veh.live is None:
            raise OffRoute(f"{vehicle_id} has no route or live fix")
        polyline = list(veh.route.polyline)
        if point_to_polyline_distance(veh.live, polyline) > \
                self.config.off_route_tolerance_m:
            raise OffRoute(f"{vehicle_id} is off its assigned route")
        resampled = resample_polyline(polyline, PROJECTION_RESAMPLE_M)
        arcs = cumulative_lengths(resampled)
        live_arc = min(zip(arcs, resampled),
                       key=lambda av: haversine_distance(veh.live, av[1]))[0]
        target_arc = live_arc + self._speed_at(veh, live_arc) * horizon_s
        target = point_at_arc(polyline, min(target_arc, arcs[-1]))
        return min(resampled, key=lambda v: haversine_distance(target, v))

    def _speed_at(self, veh: VehicleState, arc: float) -> float:
        assert veh.route is not None
        acc = cumulative_lengths(list(veh.route.polyline))
        path = veh.route.node_path
        for i in range(1, len(acc)):
            if arc < acc[i]:
                u, v = path[i - 1], path[i]
                break
        else:
            u, v = path[-2], path[-1]
        edge = self.traffic.graph.edge_between(u, v)
        return edge.length_m / self.traffic.congested_time(u, v)

    def projected_or_live(self, vehicle_id: str) -> GeoPoint:
        try:
            return self.project_location(vehicle_id)
        except OffRoute:
            veh = self.vehicles[vehicle_id]
            if veh.live is not None:
                return veh.live
            return self.scenario.line_origin(veh.line)

    # --- optimization ------------------------------------------------------

    def handle_optimize(self, origin_overrides: dict[str, GeoPoint] | None = None
                        ) -> OptimizeOutcome:
        """One de-confliction round; concurrent triggers coalesce."""
        if not self._optimize_lock.acquire(blocking=False):
            self._coalesce_requested = True
            self.counters["coalesced"] += 1
            if self._last_outcome is not None:
                return self._last_outcome
            raise NoActiveTrips("optimization in flight, nothing published yet")
        try:
            while True:
                self._coalesce_requested = False
                outcome = self._run_optimization(origin_overrides or {})
                if not self._coalesce_requested:
                    return outcome
        finally:
            self._optimize_lock.release()

    def _run_optimization(self, overrides: dict[str, GeoPoint]) -> OptimizeOutcome:
        started = time.perf_counter()
        now = self.clock()
        with self._state_lock:
            active = {vid: veh for vid, veh in self.vehicles.items()
                      if veh.trip_id is not None}
            traffic = self.traffic.snapshot()
            exclusions = list(self.exclusions.values())
            previous = {vid: veh.route for vid, veh in active.items()}
        if not active:
            raise NoActiveTrips("no vehicle has an active trip")

        candidates: dict[str, list[CandidateRoute]] = {}
        degraded: set[str] = set()
        for vid, veh in sorted(active.items()):
            origin = overrides.get(vid) or self._optimize_origin(vid)
            destination = self.trips[veh.trip_id].destination
            try:
                self.counters["routing_calls"] += 1
                routes = candidate_routes(self.scenario.graph, traffic, origin,
                                          destination, k=self.config.k_routes,
                                          exclusions=exclusions, vehicle_id=vid)
                candidates[vid] = time_filter(routes, self.config.time_filter_s)
            except (NoRouteFound, SnapFailure):
                # no fresh alternatives (typically the projected origin already
                # reached the destination); pin the remaining committed route
                # so the vehicle still exerts overlap pressure on the others
                pinned = self._remaining_candidate(vid, previous.get(vid),
                                                   traffic)
                if pinned is not None:
                    candidates[vid] = [pinned]
                degraded.add(vid)

        outcome_vehicles: dict[str, VehicleOutcome] = {}
        problem_size = 0
        solver_tag = self.solver_name
        fallback_any = False
        if candidates:
            all_routes = [r for routes in candidates.values() for r in routes]
            bqm, varmap, _ = build_tfo_qubo(all_routes, QuboConfig())
            problem_size = len(varmap)
            # continuity bonus: among overlap-equivalent assignments prefer
            # keeping each vehicle's committed route; the total bonus stays
            # below one shared-point cost so it can never outweigh a real
            # overlap reduction
            bonus = 0.5 / len(candidates)
            for vid, routes in candidates.items():
                prev = previous.get(vid)
                if prev is None:
                    continue
                for r in routes:
                    if suffix_compatible(prev.node_path, r.node_path):
                        bqm.add_linear(varmap.index_of(vid, r.route_index),
                                       -bonus)
                        break
            fallback = Assignment(
                routes={vid: self._fallback_index(previous.get(vid),
                                                  candidates[vid])
                        for vid in candidates},
                energy=0.0, feasible=True)
            self.counters["solve_calls"] += 1
            req = SolveRequest(bqm, budget_ms=self.config.solver_budget_ms,
                               seed=self.config.solver_seed)
            assignment = solve_with_fallback(self.solver, req, varmap, fallback)
            fallback_any = assignment.fallback_used
            for vid, routes in candidates.items():
                by_index = {r.route_index: r for r in routes}
                chosen = by_index[assignment.routes[vid]]
                if assignment.fallback_used and previous.get(vid) is not None:
                    stored = previous[vid]
                    changed = False
                else:
                    changed, _ = diff_routes(previous.get(vid), chosen)
                    stored = splice_routes(previous.get(vid), chosen, traffic)
                    live = self.vehicles[vid].live
                    if (changed and previous.get(vid) is not None
                            and live is not None
                            and point_to_polyline_distance(
                                live, list(stored.polyline))
                            > self.config.off_route_tolerance_m):
                        # unreachable from where the vehicle actually is;
                        # keep the committed route rather than desync
                        stored = previous[vid]
                        changed = False
                        degraded.add(vid)
                outcome_vehicles[vid] = VehicleOutcome(
                    vid, stored, changed, chosen.expected_travel_time_s,
                    assignment.fallback_used)
        for vid in sorted(degraded - set(candidates)):
            veh = active[vid]
            chosen = previous.get(vid) or replace(
                self.static_routes[veh.line], vehicle_id=vid)
            eta = traffic.path_time(list(chosen.node_path))
            outcome_vehicles[vid] = VehicleOutcome(vid, chosen, False, eta, True)

        with self._state_lock:
            for vid, out in outcome_vehicles.items():
                veh = self.vehicles[vid]
                veh.route = out.route
                if veh.trip_id is not None:
                    self.trips[veh.trip_id].route_history.append(
                        (now, out.route, solver_tag, out.fallback))
                    self.log.append({
                        "event": "route_assigned", "ts": now,
                        "trip_id": veh.trip_id,
                        "node_path": list(out.route.node_path),
                        "route_index": out.route.route_index,
                        "travel_time_s": out.route.expected_travel_time_s,
                        "solver": solver_tag, "fallback": out.fallback,
                        "changed": out.changed})
            self.last_optimize_ts = now
            self.counters["optimizations"] += 1
        response_ms = (time.perf_counter() - started) * 1000.0
        outcome = OptimizeOutcome(outcome_vehicles, problem_size, response_ms,
                                  fallback_any, solver_tag, now,
                                  degraded=tuple(sorted(degraded)))
        self.log.append({"event": "optimize", "ts": now,
                         "problem_size": problem_size,
                         "response_ms": response_ms,
                         "fallback": fallback_any,
                         "degraded": sorted(degraded),
                         "vehicles": sorted(outcome_vehicles)})
        self._last_outcome = outcome
        return outcome

    def _optimize_origin(self, vehicle_id: str) -> GeoPoint:
        return self.projected_or_live(vehicle_id)

    def _remaining_candidate(self, vehicle_id: str,
                             previous: CandidateRoute | None,
                             traffic: TrafficState) -> CandidateRoute | None:
        """The not-yet-driven suffix of the current route, as a sole candidate."""
        live = self.vehicles[vehicle_id].live
        if previous is None or live is None:
            return None
        best_i = min(range(len(previous.polyline)),
                     key=lambda i: haversine_distance(live, previous.polyline[i]))
        cut = min(best_i, len(previous.node_path) - 2)
        path = previous.node_path[cut:]
        return CandidateRoute(vehicle_id, 0, path, previous.polyline[cut:],
                              traffic.path_time(list(path)))

    @staticmethod
    def _fallback_index(previous: CandidateRoute | None,
                        routes: list[CandidateRoute]) -> int:
        """Candidate continuing the previous route, else the fastest one."""
        if previous is not None:
            for r in routes:
                if suffix_compatible(previous.node_path, r.node_path):
                    return r.route_index
        return routes[0].route_index

    # --- trip lifecycle ----------------------------------------------------

    def start_trip(self, vehicle_id: str, line: str | None = None) -> TripRecord:
        if vehicle_id not in self.vehicles:
            raise UnknownVehicle(f"unknown vehicle {vehicle_id}")
        veh = self.vehicles[vehicle_id]
        if veh.trip_id is not None:
            raise VehicleBusy(f"{vehicle_id} already has trip {veh.trip_id}")
        line = line or veh.line
        if line not in self.scenario.lines:
            raise ValueError(f"unknown line {line}")
        now = self.clock()
        with self._state_lock:
            self._trip_seq += 1
            trip = TripRecord(
                trip_id=f"trip-{self._trip_seq}", vehicle_id=vehicle_id,
                line=line, origin=self.scenario.line_origin(line),
                destination=self.scenario.line_destination(line))
            trip.activate(now)
            self.trips[trip.trip_id] = trip
            veh.line = line
            veh.trip_id = trip.trip_id
            veh.route = replace(self.static_routes[line], vehicle_id=vehicle_id)
            trip.route_history.append((now, veh.route, "static", True))
            self.log.append({
                "event": "trip_start", "ts": now, "trip_id": trip.trip_id,
                "vehicle_id": vehicle_id, "line": line,
                "origin": {"lat": trip.origin.lat, "lon": trip.origin.lon},
                "destination": {"lat": trip.destination.lat,
                                "lon": trip.destination.lon}})
            self.log.append({
                "event": "route_assigned", "ts": now, "trip_id": trip.trip_id,
                "node_path": list(veh.route.node_path),
                "route_index": veh.route.route_index,
                "travel_time_s": veh.route.expected_travel_time_s,
                "solver": "static", "fallback": True, "changed": True})
        return trip

    def end_trip(self, trip_id: str, manual: bool = True) -> TripRecord:
        if trip_id not in self.trips:
            raise NoActiveTrip(f"unknown trip {trip_id}")
        trip = self.trips[trip_id]
        now = self.clock()
        with self._state_lock:
            trip.end(now, manual=manual)
            veh = self.vehicles[trip.vehicle_id]
            veh.trip_id = None
            veh.route = None
            self.log.append({"event": "trip_end", "ts": now, "trip_id": trip_id,
                             "manual": manual})
        return trip

    def auto_end_check(self, vehicle_id: str) -> TripRecord | None:
        """End the trip when the live fix is within the auto-end radius."""
        veh = self.vehicles[vehicle_id]
        if veh.trip_id is None or veh.live is None:
            return None
        trip = self.trips[veh.trip_id]
        if haversine_distance(veh.live, trip.destination) <= \
                self.config.auto_end_radius_m:
            return self.end_trip(trip.trip_id, manual=False)
        return None

    def active_trip(self, vehicle_id: str) -> TripRecord | None:
        trip_id = self.vehicles[vehicle_id].trip_id
        return self.trips[trip_id] if trip_id is not None else None

    # --- exclusions --------------------------------------------------------

    def add_exclusion(self, box: BoundingBox) -> str:
        with self._state_lock:
            self._exclusion_seq += 1
            excl_id = f"excl-{self._exclusion_seq}"
            self.exclusions[excl_id] = box
            self.log.append({"event": "exclusion_add", "ts": self.clock(),
                             "id": excl_id, "box": box.to_json()})
        return excl_id

    def remove_exclusion(self, excl_id: str) -> bool:
        with self._state_lock:
            if excl_id not in self.exclusions:
                return False
            del self.exclusions[excl_id]
            self.log.append({"event": "exclusion_remove", "ts": self.clock(),
                             "id": excl_id})
        return True

    def list_exclusions(self) -> list[tuple[str, BoundingBox]]:
        return sorted(self.exclusions.items())

    # --- snapshot ----------------------------------------------------------

    def snapshot(self) -> dict:
        """Complete fleet state for the console; always a consistent read."""
        with self._state_lock:
            vehicles = []
            for vid in sorted(self.vehicles):
                veh = self.vehicles[vid]
                entry: dict = {"id": vid, "line": veh.line,
                               "trip_id": veh.trip_id,
                               "state": "en-route" if veh.trip_id else "idle"}
                if veh.live is not None:
                    entry["live"] = {"lat": veh.live.lat, "lon": veh.live.lon,
                                     "ts": veh.live_ts}
                if veh.route is not None:
                    entry["route"] = {
                        "node_path": list(veh.route.node_path),
                        "polyline": [{"lat": p.lat, "lon": p.lon}
                                     for p in veh.route.polyline],
                        "eta_s": veh.route.expected_travel_time_s,
                    }
                vehicles.append(entry)
            result = {
                "ts": self.clock(),
                "vehicles": vehicles,
                "exclusions": [{"id": eid, **box.to_json()}
                               for eid, box in sorted(self.exclusions.items())],
                "last_optimize_ts": self.last_optimize_ts,
            }
        for entry in vehicles:
            if entry.get("route") and entry.get("live"):
                try:
                    p = self.project_location(entry["id"])
                    entry["projected"] = {"lat": p.lat, "lon": p.lon}
                except OffRoute:
                    pass
        return result
