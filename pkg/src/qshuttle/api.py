"""HTTP layer: the fleet-service endpoints and the mock remote solver.

Thin JSON adapters over FleetService; all domain logic lives in service.py.
A second factory exposes the mock hosted-solver wire protocol (POST /solve)
so the remote solver path can be exercised end to end.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .analysis import (
    fleet_overlap_report,
    static_baseline_overlap,
    summarize_observations,
    trip_stats,
)
from .errors import (
    NoActiveTrip,
    NoActiveTrips,
    UnknownVehicle,
    VehicleBusy,
)
from .geo import BoundingBox, GeoPoint
from .service import FleetService, OptimizeOutcome, TripRecord
from .solvers import MockRemoteServer

CONSOLE_DIR = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class LocationFix(BaseModel):
    id: str
    lat: float
    lon: float
    ts: float


class UpdateBody(BaseModel):
    vehicles: list[LocationFix]


class OptimizeBody(BaseModel):
    # optional per-vehicle origin override, vehicle id -> {"lat","lon"}
    origins: dict[str, dict[str, float]] = Field(default_factory=dict)


class TripBody(BaseModel):
    vehicle_id: str
    line: str | None = None


class PointBody(BaseModel):
    lat: float
    lon: float


class ExclusionBody(BaseModel):
    sw: PointBody
    ne: PointBody


def trip_to_json(trip: TripRecord) -> dict:
    return {
        "trip_id": trip.trip_id,
        "vehicle_id": trip.vehicle_id,
        "line": trip.line,
        "state": trip.state,
        "start_ts": trip.start_ts,
        "end_ts": trip.end_ts,
        "points": len(trip.history),
    }


def outcome_to_json(outcome: OptimizeOutcome) -> dict:
    return {
        "ts": outcome.ts,
        "solver": outcome.solver,
        "problem_size": outcome.problem_size,
        "response_ms": outcome.response_ms,
        "fallback_used": outcome.fallback_used,
        "degraded": list(outcome.degraded),
        "vehicles": {
            vid: {
                "changed": out.changed,
                "eta_s": out.eta_s,
                "fallback": out.fallback,
                "node_path": list(out.route.node_path),
                "polyline": [{"lat": p.lat, "lon": p.lon}
                             for p in out.route.polyline],
            }
            for vid, out in sorted(outcome.vehicles.items())
        },
    }


def create_app(service: FleetService,
               console_dir: str | Path | None = None) -> FastAPI:
    """Fleet-service HTTP application wrapping an existing FleetService."""
    app = FastAPI(title="qshuttle fleet service")
    console = Path(console_dir) if console_dir is not None else CONSOLE_DIR

    def error(status: int, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.post("/update")
    def update(body: UpdateBody):
        try:
            return service.handle_update([f.model_dump() for f in body.vehicles])
        except UnknownVehicle as exc:
            return error(404, exc)

    @app.post("/optimize")
    def optimize(body: OptimizeBody | None = None):
        overrides = {
            vid: GeoPoint(p["lat"], p["lon"])
            for vid, p in (body.origins if body else {}).items()
        }
        try:
            return outcome_to_json(service.handle_optimize(overrides or None))
        except NoActiveTrips as exc:
            return error(409, exc)

    @app.get("/fleet")
    def fleet():
        return service.snapshot()

    @app.post("/trips")
    def start_trip(body: TripBody):
        try:
            return trip_to_json(service.start_trip(body.vehicle_id, body.line))
        except UnknownVehicle as exc:
            return error(404, exc)
        except VehicleBusy as exc:
            return error(409, exc)
        except ValueError as exc:
            return error(400, exc)

    @app.post("/trips/{trip_id}/end")
    def end_trip(trip_id: str):
        try:
            return trip_to_json(service.end_trip(trip_id))
        except NoActiveTrip as exc:
            return error(409, exc)

    @app.post("/exclusions")
    def add_exclusion(body: ExclusionBody):
        try:
            box = BoundingBox(GeoPoint(body.sw.lat, body.sw.lon),
                              GeoPoint(body.ne.lat, body.ne.lon))
        except ValueError as exc:
            return error(400, exc)
        return {"id": service.add_exclusion(box), **box.to_json()}

    @app.delete("/exclusions/{excl_id}")
    def remove_exclusion(excl_id: str):
        if not service.remove_exclusion(excl_id):
            return error(404, KeyError(f"unknown exclusion {excl_id}"))
        return {"removed": excl_id}

    @app.get("/report")
    def report():
        trips = [t for t in service.trips.values()
                 if t.state in ("ended-manual", "ended-auto")]
        observations = fleet_overlap_report(trips)
        return {
            "pairs": summarize_observations(observations),
            "baseline": static_baseline_overlap(service.scenario),
            "trip_stats": trip_stats(trips, service.scenario,
                                     service.config.duration_radius_m),
            "trips_total": len(service.trips),
            "trips_ended": len(trips),
        }

    @app.get("/console")
    def console_index():
        index = console / "index.html"
        if not index.exists():
            return JSONResponse(status_code=404,
                                content={"error": "console bundle not built"})
        return FileResponse(index)

    @app.get("/console/{asset}")
    def console_asset(asset: str):
        path = console / asset
        if "/" in asset or ".." in asset or not path.is_file():
            return JSONResponse(status_code=404, content={"error": "not found"})
        return FileResponse(path)

    return app


def create_mock_hss_app(server: MockRemoteServer | None = None) -> FastAPI:
    """Mock hosted-solver endpoint speaking the POST /solve wire format."""
    backend = server or MockRemoteServer()
    app = FastAPI(title="qshuttle mock remote solver")

    @app.post("/solve")
    async def solve(request: Request):
        payload = await request.json()
        _latency_ms, response = backend.handle(payload)
        return response

    return app
