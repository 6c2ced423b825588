"""Congestion model and discrete-time fleet simulator.

Edge delay follows the BPR volume-delay curve, with fleet vehicles weighted
so the fleet's own route choices visibly perturb travel times at desk scale.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .errors import RouteDiscontinuity
from .geo import (
    GeoPoint,
    cumulative_lengths,
    haversine_distance,
    point_at_arc,
    point_to_polyline_distance,
)
from .roadgraph import RoadEdge, RoadGraph

if TYPE_CHECKING:
    from .routing import CandidateRoute

BPR_ALPHA = 0.15
BPR_BETA = 4
DEFAULT_FLEET_WEIGHT = 50.0
REASSIGN_TOLERANCE_M = 50.0


def congested_edge_time(edge: RoadEdge, background_load: float, fleet_load: float,
                        fleet_weight: float = DEFAULT_FLEET_WEIGHT) -> float:
    """BPR delay: t0 * (1 + 0.15 * (load / capacity)^4), in seconds."""
    if background_load < 0 or fleet_load < 0:
        raise ValueError("loads must be non-negative")
    load = background_load + fleet_weight * fleet_load
    ratio = load / edge.capacity_vph
    return edge.free_flow_time_s * (1.0 + BPR_ALPHA * ratio ** BPR_BETA)


@dataclass
class TrafficState:
    """Per-edge background and fleet loads over a road graph.

    Keys are directed (from, to) node-id pairs. Missing keys mean zero load.
    """

    graph: RoadGraph
    background: dict[tuple[str, str], float] = field(default_factory=dict)
    fleet: dict[tuple[str, str], int] = field(default_factory=dict)
    fleet_weight: float = DEFAULT_FLEET_WEIGHT

    def congested_time(self, u: str, v: str) -> float:
        edge = self.graph.edge_between(u, v)
        return congested_edge_time(edge, self.background.get((u, v), 0.0),
                                   self.fleet.get((u, v), 0), self.fleet_weight)

    def path_time(self, node_path: list[str]) -> float:
        return sum(self.congested_time(u, v) for u, v in zip(node_path, node_path[1:]))

    def set_uniform_background(self, utilization: float) -> None:
        """Set every edge's background load to utilization * capacity."""
        self.background = {
            (u, v): utilization * e.capacity_vph
            for u, v, e in self.graph.directed_edges()
        }

    def recompute_fleet_loads(self, routes: Iterable["CandidateRoute"]) -> None:
        loads: dict[tuple[str, str], int] = {}
        for route in routes:
            for u, v in zip(route.node_path, route.node_path[1:]):
                loads[(u, v)] = loads.get((u, v), 0) + 1
        self.fleet = loads

    def snapshot(self) -> "TrafficState":
        return TrafficState(self.graph, dict(self.background), dict(self.fleet),
                            self.fleet_weight)


@dataclass
class SimClock:
    now_s: float = 0.0
    tick_s: float = 1.0

    def __post_init__(self):
        if self.tick_s <= 0:
            raise ValueError("tick length must be positive")

    def advance(self) -> None:
        self.now_s += self.tick_s


@dataclass
class SimVehicle:
    vehicle_id: str
    line: str
    route: "CandidateRoute | None" = None
    progress_m: float = 0.0
    state: str = "idle"  # idle | en-route | arrived

    def route_length(self) -> float:
        assert self.route is not None
        return cumulative_lengths(self.route.polyline)[-1]

    def position(self) -> GeoPoint:
        assert self.route is not None, "vehicle has no assigned route"
        return point_at_arc(self.route.polyline, self.progress_m)

    def current_edge(self) -> tuple[str, str]:
        """Directed edge the vehicle is currently on (last edge at route end)."""
        assert self.route is not None
        acc = cumulative_lengths(self.route.polyline)
        path = self.route.node_path
        for i in range(1, len(acc)):
            if self.progress_m < acc[i]:
                return path[i - 1], path[i]
        return path[-2], path[-1]

    def speed(self, traffic: TrafficState) -> float:
        """m/s on the current edge under current congestion."""
        u, v = self.current_edge()
        edge = traffic.graph.edge_between(u, v)
        return edge.length_m / traffic.congested_time(u, v)


def step(clock: SimClock, vehicles: list[SimVehicle], traffic: TrafficState) -> None:
    """Advance every en-route vehicle one tick, then refresh fleet loads.

    Speed is sampled once per tick from the edge the vehicle starts the tick on.
    """
    for veh in vehicles:
        if veh.state != "en-route":
            continue
        advance = veh.speed(traffic) * clock.tick_s
        veh.progress_m = min(veh.progress_m + advance, veh.route_length())
        if veh.progress_m >= veh.route_length():
            veh.state = "arrived"
    traffic.recompute_fleet_loads(
        v.route for v in vehicles if v.state == "en-route" and v.route is not None
    )
    clock.advance()


def reassign_route(vehicle: SimVehicle, new_route: "CandidateRoute",
                   projected: GeoPoint | None = None,
                   tolerance_m: float = REASSIGN_TOLERANCE_M) -> None:
    """Swap the vehicle onto new_route, anchored at its nearest vertex.

    The new route must pass within tolerance_m of the vehicle's current
    position (covering routes spliced to include the already-driven prefix)
    or start within tolerance_m of its projected position.
    """
    if vehicle.route is not None and new_route.node_path == vehicle.route.node_path:
        vehicle.route = new_route
        return
    start = new_route.polyline[0]
    ok = False
    if vehicle.route is not None:
        ok = point_to_polyline_distance(vehicle.position(),
                                        list(new_route.polyline)) <= tolerance_m
    if not ok and projected is not None:
        ok = haversine_distance(start, projected) <= tolerance_m
    if not ok:
        raise RouteDiscontinuity(
            f"new route for {vehicle.vehicle_id} is beyond {tolerance_m:.0f} m"
        )
    if vehicle.route is not None:
        current = vehicle.position()
        acc = cumulative_lengths(new_route.polyline)
        best_arc, best_d = 0.0, float("inf")
        for arc, vertex in zip(acc, new_route.polyline):
            d = haversine_distance(current, vertex)
            if d < best_d:
                best_arc, best_d = arc, d
        vehicle.progress_m = best_arc
    else:
        vehicle.progress_m = 0.0
    vehicle.route = new_route


def freeze(traffic: TrafficState) -> TrafficState:
    """Deep-copied traffic snapshot that later mutations cannot affect."""
    return copy.deepcopy(traffic)
