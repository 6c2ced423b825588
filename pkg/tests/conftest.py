import math
import random

import pytest

from qshuttle.geo import GeoPoint
from qshuttle.roadgraph import RoadEdge, RoadGraph
from qshuttle.routing import CandidateRoute
from qshuttle.traffic import TrafficState

BASE_LAT = 38.75
BASE_LON = -9.15
M_PER_DEG_LAT = 6_371_009.0 * math.pi / 180.0


def xy_to_geo(x_m: float, y_m: float) -> GeoPoint:
    """Local east/north meters around the test origin, as a GeoPoint."""
    lat = BASE_LAT + y_m / M_PER_DEG_LAT
    lon = BASE_LON + x_m / (M_PER_DEG_LAT * math.cos(math.radians(BASE_LAT)))
    return GeoPoint(lat, lon)


def make_diamond_graph() -> RoadGraph:
    """Four nodes, two arms from A to D: A-B-D (fast) and A-C-D (slow)."""
    nodes = {
        "A": xy_to_geo(0, 0),
        "B": xy_to_geo(500, 400),
        "C": xy_to_geo(500, -400),
        "D": xy_to_geo(1000, 0),
    }
    edges = [
        RoadEdge("A", "B", 650.0, 40.0, 1000.0),
        RoadEdge("B", "D", 650.0, 40.0, 1000.0),
        RoadEdge("A", "C", 650.0, 60.0, 1000.0),
        RoadEdge("C", "D", 650.0, 60.0, 1000.0),
    ]
    return RoadGraph(nodes=nodes, edges=edges)


@pytest.fixture
def diamond():
    graph = make_diamond_graph()
    return graph, TrafficState(graph)


def make_route(vehicle_id: str, route_index: int, node_path: list[str],
               travel_time: float) -> CandidateRoute:
    """Synthetic route over an abstract node universe (for QUBO tests)."""
    polyline = tuple(
        GeoPoint(38.0 + 1e-3 * (hash(n) % 997), -9.0 + 1e-3 * (hash(n) % 991))
        for n in node_path
    )
    return CandidateRoute(vehicle_id, route_index, tuple(node_path), polyline,
                          travel_time)


def random_tfo_instance(rng: random.Random, max_vars: int = 12,
                        n_nodes: int = 15) -> list[CandidateRoute]:
    """Random fleet of candidate routes sharing nodes from a small universe."""
    universe = [f"n{i}" for i in range(n_nodes)]
    routes: list[CandidateRoute] = []
    n_vars = 0
    vehicle = 0
    while True:
        k = rng.randint(2, 3)
        if n_vars + k > max_vars:
            if n_vars >= 2:
                break
            k = max_vars - n_vars
            if k < 1:
                break
        vid = f"v{vehicle}"
        for j in range(k):
            length = rng.randint(3, 6)
            path = rng.sample(universe, length)
            routes.append(make_route(vid, j, path, 100.0 + 10.0 * j + rng.random()))
        n_vars += k
        vehicle += 1
        if n_vars >= max_vars or (vehicle >= 2 and rng.random() < 0.3):
            break
    return routes
