import pytest

from qshuttle.errors import RouteDiscontinuity
from qshuttle.geo import haversine_distance, point_to_polyline_distance
from qshuttle.roadgraph import RoadEdge
from qshuttle.routing import CandidateRoute
from qshuttle.traffic import (
    SimClock,
    SimVehicle,
    TrafficState,
    congested_edge_time,
    reassign_route,
    step,
)

from conftest import make_diamond_graph, xy_to_geo


def make_edge(t0=100.0, cap=1000.0):
    return RoadEdge("a", "b", 1000.0, t0, cap)


class TestCongestedEdgeTime:
    def test_zero_load_is_free_flow(self):
        e = make_edge()
        assert congested_edge_time(e, 0.0, 0.0) == e.free_flow_time_s

    def test_load_at_capacity(self):
        e = make_edge(t0=100.0, cap=1000.0)
        assert congested_edge_time(e, 1000.0, 0.0) == pytest.approx(115.0)

    def test_formula(self):
        e = make_edge(t0=80.0, cap=500.0)
        got = congested_edge_time(e, 200.0, 2, fleet_weight=50.0)
        want = 80.0 * (1 + 0.15 * ((200.0 + 50.0 * 2) / 500.0) ** 4)
        assert got == pytest.approx(want, rel=1e-12)

    def test_monotone_in_loads(self):
        e = make_edge()
        prev = 0.0
        for bg in range(0, 3000, 100):
            t = congested_edge_time(e, float(bg), 0)
            assert t >= prev
            prev = t
        prev = 0.0
        for fleet in range(0, 20):
            t = congested_edge_time(e, 300.0, fleet)
            assert t >= prev
            prev = t

    def test_doubling_never_decreases(self):
        e = make_edge()
        for bg in (10.0, 250.0, 900.0):
            assert congested_edge_time(e, 2 * bg, 0) >= congested_edge_time(e, bg, 0)

    def test_negative_load_rejected(self):
        with pytest.raises(ValueError):
            congested_edge_time(make_edge(), -1.0, 0)


def straight_route(length_m=2000.0, n=5, vehicle="bus-1"):
    step_m = length_m / (n - 1)
    poly = tuple(xy_to_geo(i * step_m, 0.0) for i in range(n))
    path = tuple(f"s{i}" for i in range(n))
    return CandidateRoute(vehicle, 0, path, poly, 200.0)


def straight_graph_traffic(route, t0_per_edge=50.0):
    from qshuttle.roadgraph import RoadGraph

    nodes = {n: p for n, p in zip(route.node_path, route.polyline)}
    edges = []
    for (u, a), (v, b) in zip(list(nodes.items()), list(nodes.items())[1:]):
        edges.append(RoadEdge(u, v, max(haversine_distance(a, b), 1.0),
                              t0_per_edge, 1000.0))
    return TrafficState(RoadGraph(nodes=nodes, edges=edges))


class TestStep:
    def test_idle_unchanged(self):
        route = straight_route()
        traffic = straight_graph_traffic(route)
        veh = SimVehicle("bus-1", "red", route=route, progress_m=0.0, state="idle")
        clock = SimClock(tick_s=1.0)
        step(clock, [veh], traffic)
        assert veh.progress_m == 0.0
        assert veh.state == "idle"
        assert clock.now_s == 1.0

    def test_arrival_clamped(self):
        route = straight_route(length_m=2000.0)
        traffic = straight_graph_traffic(route, t0_per_edge=25.0)  # 20 m/s
        veh = SimVehicle("bus-1", "red", route=route,
                         progress_m=veh_len(route) - 10.0, state="en-route")
        step(SimClock(tick_s=1.0), [veh], traffic)
        assert veh.state == "arrived"
        assert veh.progress_m == pytest.approx(veh_len(route))

    def test_two_small_ticks_equal_one_big(self):
        route = straight_route(length_m=4000.0, n=2)
        traffic = straight_graph_traffic(route)
        traffic.fleet_weight = 0.0  # keep speed constant across ticks
        a = SimVehicle("bus-1", "red", route=route, state="en-route")
        b = SimVehicle("bus-2", "red", route=route, state="en-route")
        small, big = SimClock(tick_s=1.0), SimClock(tick_s=2.0)
        step(small, [a], traffic)
        step(small, [a], traffic)
        step(big, [b], traffic)
        assert a.progress_m == pytest.approx(b.progress_m, rel=1e-12)

    def test_conservation_and_position_on_polyline(self):
        route = straight_route()
        traffic = straight_graph_traffic(route)
        vehicles = [
            SimVehicle("bus-1", "red", route=route, state="en-route"),
            SimVehicle("bus-2", "red", route=route, state="idle", progress_m=0.0),
        ]
        clock = SimClock(tick_s=5.0)
        for _ in range(30):
            step(clock, vehicles, traffic)
            assert len(vehicles) == 2
            for v in vehicles:
                d = point_to_polyline_distance(v.position(), list(route.polyline))
                assert d < 1e-6

    def test_arrived_stays_arrived(self):
        route = straight_route(length_m=100.0, n=2)
        traffic = straight_graph_traffic(route, t0_per_edge=1.0)
        veh = SimVehicle("bus-1", "red", route=route, state="en-route")
        clock = SimClock(tick_s=10.0)
        step(clock, [veh], traffic)
        assert veh.state == "arrived"
        for _ in range(5):
            step(clock, [veh], traffic)
            assert veh.state == "arrived"

    def test_fleet_loads_follow_assignments(self):
        route = straight_route()
        traffic = straight_graph_traffic(route)
        veh = SimVehicle("bus-1", "red", route=route, state="en-route")
        step(SimClock(tick_s=1.0), [veh], traffic)
        first_edge = (route.node_path[0], route.node_path[1])
        assert traffic.fleet[first_edge] == 1
        veh.state = "arrived"
        step(SimClock(tick_s=1.0), [veh], traffic)
        assert traffic.fleet.get(first_edge, 0) == 0


def veh_len(route):
    from qshuttle.geo import cumulative_lengths

    return cumulative_lengths(list(route.polyline))[-1]


class TestReassignRoute:
    def test_identical_route_idempotent(self):
        route = straight_route()
        veh = SimVehicle("bus-1", "red", route=route, progress_m=500.0,
                         state="en-route")
        before = veh.position()
        reassign_route(veh, route)
        assert veh.progress_m == pytest.approx(500.0)
        assert veh.position() == before

    def test_fresh_start_progress_zero(self):
        route = straight_route()
        veh = SimVehicle("bus-1", "red", route=route, progress_m=0.0,
                         state="en-route")
        new = straight_route(vehicle="bus-1")
        reassign_route(veh, new)
        assert veh.progress_m == 0.0

    def test_far_route_rejected(self):
        route = straight_route()
        veh = SimVehicle("bus-1", "red", route=route, progress_m=0.0,
                         state="en-route")
        poly = tuple(xy_to_geo(2000.0 + i * 100, 500.0) for i in range(3))
        far = CandidateRoute("bus-1", 0, ("x0", "x1", "x2"), poly, 100.0)
        with pytest.raises(RouteDiscontinuity):
            reassign_route(veh, far)

    def test_projected_anchor_accepted(self):
        route = straight_route()
        veh = SimVehicle("bus-1", "red", route=route, progress_m=0.0,
                         state="en-route")
        projected = xy_to_geo(1000.0, 0.0)
        poly = tuple(xy_to_geo(1000.0 + i * 500, 0.0) for i in range(3))
        new = CandidateRoute("bus-1", 0, ("y0", "y1", "y2"), poly, 100.0)
        reassign_route(veh, new, projected=projected)
        assert veh.route is new
        # nearest vertex to the current (origin) position is the new start
        assert veh.progress_m == 0.0


class TestClock:
    def test_tick_positive(self):
        with pytest.raises(ValueError):
            SimClock(tick_s=0.0)

    def test_monotone(self):
        clock = SimClock(tick_s=2.5)
        for i in range(4):
            clock.advance()
        assert clock.now_s == 10.0
