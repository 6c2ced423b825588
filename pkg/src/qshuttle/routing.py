"""Congestion-aware candidate route generation over the synthetic road graph.

Loopless alternatives come from Yen's k-shortest paths on the time-weighted
graph; paths touching an exclusion box are discarded and enumeration continues.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .errors import NoRouteFound
from .geo import BoundingBox, GeoPoint, point_in_box
from .roadgraph import SNAP_RADIUS_M, RoadGraph
from .traffic import TrafficState

DEFAULT_K = 3
DEFAULT_TIME_SLACK_S = 120.0
# Yen's enumeration is cut off after this many generated paths so heavily
# excluded graphs cannot stall an optimization round.
MAX_PATHS_EXAMINED = 500
# Yen's next-best path is usually a micro-detour of the previous one; skip a
# candidate when this fraction of its nodes is already covered by a selected
# route, so alternatives are genuinely distinct corridors.
DEFAULT_DIVERSITY_THRESHOLD = 0.7


@dataclass(frozen=True)
class CandidateRoute:
    vehicle_id: str
    route_index: int
    node_path: tuple[str, ...]
    polyline: tuple[GeoPoint, ...]
    expected_travel_time_s: float

    def __post_init__(self):
        if len(self.node_path) < 2:
            raise ValueError("route needs at least 2 nodes")
        if len(set(self.node_path)) != len(self.node_path):
            raise ValueError("route must be loopless")
        if self.expected_travel_time_s <= 0:
            raise ValueError("expected travel time must be positive")

    def with_index(self, route_index: int) -> "CandidateRoute":
        return CandidateRoute(self.vehicle_id, route_index, self.node_path,
                              self.polyline, self.expected_travel_time_s)


def _touches_exclusion(polyline: tuple[GeoPoint, ...],
                       exclusions: list[BoundingBox]) -> bool:
    return any(point_in_box(p, box) for p in polyline for box in exclusions)


def _containment(path: tuple[str, ...], selected: list[CandidateRoute]) -> float:
    nodes = set(path)
    return max((len(nodes & set(r.node_path)) / len(nodes) for r in selected),
               default=0.0)


def candidate_routes(graph: RoadGraph, traffic: TrafficState,
                     origin: GeoPoint, destination: GeoPoint,
                     k: int = DEFAULT_K,
                     exclusions: list[BoundingBox] | None = None,
                     vehicle_id: str = "",
                     diversity_threshold: float = DEFAULT_DIVERSITY_THRESHOLD
                     ) -> list[CandidateRoute]:
    """Up to k loopless routes, fastest first under current congestion.

    Paths touching an exclusion box are dropped. Paths that mostly retrace an
    already selected route are passed over while more distinct alternatives
    exist; if enumeration runs out, the fastest passed-over paths fill in.

    Raises SnapFailure when an endpoint is beyond the snap radius, and
    NoRouteFound when no exclusion-respecting path exists.
    """
    if not 1 <= k <= 16:
        raise ValueError("k must be in [1, 16]")
    exclusions = exclusions or []
    src = graph.snap_to_node(origin, SNAP_RADIUS_M)
    dst = graph.snap_to_node(destination, SNAP_RADIUS_M)
    if src == dst:
        raise NoRouteFound("origin and destination snap to the same node")

    def weight(u, v, _data):
        return traffic.congested_time(u, v)

    def route_for(path: list[str]) -> CandidateRoute:
        return CandidateRoute(
            vehicle_id=vehicle_id,
            route_index=0,
            node_path=tuple(path),
            polyline=tuple(graph.polyline_for(path)),
            expected_travel_time_s=traffic.path_time(list(path)),
        )

    selected: list[CandidateRoute] = []
    passed_over: list[CandidateRoute] = []
    examined = 0
    try:
        for path in nx.shortest_simple_paths(graph.graph, src, dst, weight=weight):
            examined += 1
            polyline = tuple(graph.polyline_for(path))
            if not _touches_exclusion(polyline, exclusions):
                route = route_for(list(path))
                if _containment(route.node_path, selected) < diversity_threshold:
                    selected.append(route)
                else:
                    passed_over.append(route)
            if len(selected) >= k or examined >= MAX_PATHS_EXAMINED:
                break
    except nx.NetworkXNoPath:
        pass
    for route in passed_over:
        if len(selected) >= k:
            break
        selected.append(route)
    if not selected:
        raise NoRouteFound(f"no exclusion-respecting path from {src} to {dst}")
    selected.sort(key=lambda r: r.expected_travel_time_s)
    return [r.with_index(i) for i, r in enumerate(selected)]


def time_filter(routes: list[CandidateRoute],
                slack_s: float = DEFAULT_TIME_SLACK_S) -> list[CandidateRoute]:
    """Drop routes more than slack_s slower than the fastest; order preserved."""
    if not routes:
        raise ValueError("routes must be non-empty")
    fastest = min(r.expected_travel_time_s for r in routes)
    return [r for r in routes if r.expected_travel_time_s <= fastest + slack_s]
