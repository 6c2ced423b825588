"""HTTP layer tests: endpoint wiring, error mapping, mock remote solver."""

import pytest
from fastapi.testclient import TestClient

from qshuttle.api import create_app, create_mock_hss_app
from qshuttle.qubo import BinaryQuadraticModel
from qshuttle.scenario import build_shared_corridor_scenario
from qshuttle.service import FleetService, ServiceConfig
from qshuttle.solvers import (
    MockRemoteServer,
    RemoteSolverClient,
    SolveRequest,
    remote_solve,
)


class FakeClock:
    def __init__(self, now=0.0):
        self.now = now

    def __call__(self):
        return self.now

    def advance(self, dt):
        self.now += dt


@pytest.fixture()
def scenario():
    return build_shared_corridor_scenario(n_buses=3)


@pytest.fixture()
def harness(scenario, tmp_path):
    clock = FakeClock()
    service = FleetService(
        scenario, config=ServiceConfig(solver_budget_ms=25.0), clock=clock,
        log_path=tmp_path / "events.jsonl")
    client = TestClient(create_app(service, console_dir=tmp_path / "dist"))
    return service, client, clock


def fix(service, vid, ts):
    origin = service.scenario.line_origin(service.vehicles[vid].line)
    return {"id": vid, "lat": origin.lat, "lon": origin.lon, "ts": ts}


class TestUpdate:
    def test_accepts_batch(self, harness):
        service, client, _ = harness
        resp = client.post("/update", json={"vehicles": [fix(service, "bus-1", 1.0)]})
        assert resp.status_code == 200
        assert resp.json() == {"accepted": 1, "dropped": []}

    def test_unknown_vehicle_is_404(self, harness):
        _, client, _ = harness
        resp = client.post("/update", json={"vehicles": [
            {"id": "ghost", "lat": 0.0, "lon": 0.0, "ts": 1.0}]})
        assert resp.status_code == 404
        assert "ghost" in resp.json()["error"]

    def test_malformed_body_is_422(self, harness):
        _, client, _ = harness
        assert client.post("/update", json={"vehicles": [{"id": "bus-1"}]}).status_code == 422


class TestTrips:
    def test_start_and_end(self, harness):
        service, client, clock = harness
        resp = client.post("/trips", json={"vehicle_id": "bus-1", "line": "red"})
        assert resp.status_code == 200
        trip = resp.json()
        assert trip["state"] == "active" and trip["line"] == "red"
        clock.advance(60.0)
        ended = client.post(f"/trips/{trip['trip_id']}/end")
        assert ended.status_code == 200
        assert ended.json()["state"] == "ended-manual"

    def test_double_start_is_409(self, harness):
        _, client, _ = harness
        client.post("/trips", json={"vehicle_id": "bus-1"})
        assert client.post("/trips", json={"vehicle_id": "bus-1"}).status_code == 409

    def test_unknown_vehicle_and_line(self, harness):
        _, client, _ = harness
        assert client.post("/trips", json={"vehicle_id": "ghost"}).status_code == 404
        assert client.post("/trips", json={"vehicle_id": "bus-1",
                                           "line": "mauve"}).status_code == 400

    def test_end_unknown_trip_is_409(self, harness):
        _, client, _ = harness
        assert client.post("/trips/trip-99/end").status_code == 409


class TestOptimize:
    def test_no_active_trips_is_409(self, harness):
        _, client, _ = harness
        assert client.post("/optimize").status_code == 409

    def test_round_returns_routes(self, harness):
        service, client, clock = harness
        for vid in sorted(service.vehicles):
            client.post("/trips", json={"vehicle_id": vid})
        clock.advance(30.0)
        client.post("/update", json={"vehicles": [
            fix(service, vid, clock.now) for vid in sorted(service.vehicles)]})
        resp = client.post("/optimize")
        assert resp.status_code == 200
        outcome = resp.json()
        assert set(outcome["vehicles"]) == set(service.vehicles)
        for out in outcome["vehicles"].values():
            assert len(out["node_path"]) >= 2
            assert len(out["polyline"]) == len(out["node_path"])
        assert outcome["fallback_used"] is False


class TestFleetSnapshot:
    def test_snapshot_shape(self, harness):
        service, client, clock = harness
        client.post("/trips", json={"vehicle_id": "bus-1"})
        client.post("/update", json={"vehicles": [fix(service, "bus-1", 1.0)]})
        snap = client.get("/fleet").json()
        assert len(snap["vehicles"]) == len(service.vehicles)
        bus1 = next(v for v in snap["vehicles"] if v["id"] == "bus-1")
        assert bus1["state"] == "en-route"
        assert "live" in bus1 and "route" in bus1


class TestExclusions:
    def test_add_list_remove(self, harness):
        _, client, _ = harness
        box = {"sw": {"lat": 38.74, "lon": -9.16}, "ne": {"lat": 38.76, "lon": -9.14}}
        added = client.post("/exclusions", json=box).json()
        assert added["id"] == "excl-1" and added["sw"] == box["sw"]
        snap = client.get("/fleet").json()
        assert [e["id"] for e in snap["exclusions"]] == ["excl-1"]
        assert client.delete("/exclusions/excl-1").status_code == 200
        assert client.delete("/exclusions/excl-1").status_code == 404

    def test_inverted_box_is_400(self, harness):
        _, client, _ = harness
        box = {"sw": {"lat": 38.76, "lon": -9.16}, "ne": {"lat": 38.74, "lon": -9.14}}
        assert client.post("/exclusions", json=box).status_code == 400


class TestReportAndConsole:
    def test_report_keys(self, harness):
        service, client, clock = harness
        trip = client.post("/trips", json={"vehicle_id": "bus-1"}).json()
        client.post("/update", json={"vehicles": [fix(service, "bus-1", 1.0)]})
        clock.advance(60.0)
        client.post(f"/trips/{trip['trip_id']}/end")
        report = client.get("/report").json()
        assert set(report) >= {"pairs", "baseline", "trip_stats", "trips_ended"}
        assert report["trips_ended"] == 1
        assert report["baseline"]["red->red"] == 1.0

    def test_console_404_without_bundle(self, harness):
        _, client, _ = harness
        assert client.get("/console").status_code == 404

    def test_console_serves_bundle(self, scenario, tmp_path):
        dist = tmp_path / "dist"
        dist.mkdir()
        (dist / "index.html").write_text("<html>console</html>")
        (dist / "console.js").write_text("export {};")
        service = FleetService(scenario)
        client = TestClient(create_app(service, console_dir=dist))
        assert b"console" in client.get("/console").content
        assert client.get("/console/console.js").status_code == 200
        assert client.get("/console/missing.js").status_code == 404


def small_bqm():
    bqm = BinaryQuadraticModel()
    bqm.add_linear(0, 1.0)
    bqm.add_linear(1, -1.0)
    bqm.add_quadratic(0, 1, 2.0)
    return bqm


class TestMockRemote:
    def test_solve_wire_format(self):
        client = TestClient(create_mock_hss_app())
        resp = client.post("/solve", json={"bqm": small_bqm().to_json(),
                                           "budget_ms": 10.0, "seed": 0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["solver"] == "mock-hss"
        assert body["sample"] == [0, 1]
        assert body["energy"] == -1.0

    def test_injected_failure_reported_in_body(self):
        client = TestClient(create_mock_hss_app(MockRemoteServer(failure_rate=1.0)))
        body = client.post("/solve", json={"bqm": small_bqm().to_json()}).json()
        assert "error" in body

    def test_remote_client_round_trip_over_http(self):
        http = TestClient(create_mock_hss_app())

        def transport(payload):
            return 0.0, http.post("/solve", json=payload).json()

        client = RemoteSolverClient(transport, timeout_ms=1000.0)
        result = remote_solve(client, SolveRequest(small_bqm(), budget_ms=10.0))
        assert result.sample == (0, 1)
        assert result.solver == "mock-hss"
