"""Overlap metrics, trip statistics, and report emission.

The overlap fraction is directional: the share of one vehicle's resampled
location history lying within the overlap radius of another vehicle's
navigated route. Observations are grouped into line pairs and summarized
with box-plot statistics.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegeneratePolyline, EmptyHistory
from .geo import EARTH_RADIUS_M, GeoPoint, resample_polyline
from .routing import candidate_routes
from .scenario import Scenario
from .service import TripRecord, classify_trip
from .traffic import TrafficState

OVERLAP_RADIUS_M = 50.0
RESAMPLE_SPACING_M = 25.0
MIN_CONCURRENCY_S = 60.0
MORNING_END_H = 12.0


def _min_distances(points: list[GeoPoint], reference: list[GeoPoint]) -> np.ndarray:
    """Per-point haversine distance to the nearest reference point, meters."""
    a = np.radians(np.array([[p.lat, p.lon] for p in points]))
    b = np.radians(np.array([[p.lat, p.lon] for p in reference]))
    dphi = a[:, 0, None] - b[None, :, 0]
    dlam = a[:, 1, None] - b[None, :, 1]
    h = (np.sin(dphi / 2.0) ** 2
         + np.cos(a[:, 0, None]) * np.cos(b[None, :, 0])
         * np.sin(dlam / 2.0) ** 2)
    d = 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    return d.min(axis=1)


def pairwise_overlap(history: list[GeoPoint], route: list[GeoPoint],
                     radius_m: float = OVERLAP_RADIUS_M) -> float:
    """Fraction of history points within radius_m of the route.

    Both inputs are expected pre-resampled at a common spacing; the metric is
    directional (history vs route, not symmetric).
    """
    if not history:
        raise EmptyHistory("no history points to measure")
    if radius_m <= 0:
        raise ValueError("radius must be positive")
    if not route:
        return 0.0
    return float(np.mean(_min_distances(history, route) <= radius_m))


@dataclass(frozen=True)
class OverlapObservation:
    observer: str  # vehicle id whose history is measured
    reference: str  # vehicle id whose route is the target
    pair: str  # canonical line-pair tag, e.g. "blue-red"
    fraction: float
    window: tuple[float, float]  # concurrent interval [start, end]

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction out of [0, 1]")
        if self.observer == self.reference:
            raise ValueError("observer equals reference")


def line_pair_tag(line_a: str, line_b: str) -> str:
    return "-".join(sorted((line_a, line_b)))


def concurrent_window(a: TripRecord, b: TripRecord,
                      min_overlap_s: float = MIN_CONCURRENCY_S
                      ) -> tuple[float, float] | None:
    """Intersection of the trips' active intervals when long enough."""
    if a.start_ts is None or a.end_ts is None:
        return None
    if b.start_ts is None or b.end_ts is None:
        return None
    lo = max(a.start_ts, b.start_ts)
    hi = min(a.end_ts, b.end_ts)
    return (lo, hi) if hi - lo >= min_overlap_s else None


def _resampled_history(trip: TripRecord) -> list[GeoPoint] | None:
    points = [p for _, p in trip.history]
    if len(points) < 2:
        return None
    try:
        return resample_polyline(points, RESAMPLE_SPACING_M)
    except DegeneratePolyline:
        return None


def _resampled_route(trip: TripRecord) -> list[GeoPoint] | None:
    if not trip.route_history:
        return None
    route = trip.route_history[-1][1]
    return resample_polyline(list(route.polyline), RESAMPLE_SPACING_M)


def fleet_overlap_report(trips: list[TripRecord],
                         radius_m: float = OVERLAP_RADIUS_M,
                         min_overlap_s: float = MIN_CONCURRENCY_S
                         ) -> list[OverlapObservation]:
    """One directional observation per ordered pair of concurrent trips."""
    observations: list[OverlapObservation] = []
    usable = [t for t in trips
              if t.state in ("ended-manual", "ended-auto")]
    for a in usable:
        history = _resampled_history(a)
        if history is None:
            continue
        for b in usable:
            if b.trip_id == a.trip_id or b.vehicle_id == a.vehicle_id:
                continue
            window = concurrent_window(a, b, min_overlap_s)
            if window is None:
                continue
            route = _resampled_route(b)
            if route is None:
                continue
            observations.append(OverlapObservation(
                observer=a.vehicle_id, reference=b.vehicle_id,
                pair=line_pair_tag(a.line, b.line),
                fraction=pairwise_overlap(history, route, radius_m),
                window=window))
    return observations


def summarize_observations(observations: list[OverlapObservation]) -> dict:
    """Box-plot statistics (min, q1, median, q3, max, count, mean) per pair."""
    by_pair: dict[str, list[float]] = {}
    for obs in observations:
        by_pair.setdefault(obs.pair, []).append(obs.fraction)
    summary = {}
    for pair in sorted(by_pair):
        values = sorted(by_pair[pair])
        if len(values) >= 2:
            q1, median, q3 = statistics.quantiles(values, n=4,
                                                  method="inclusive")
        else:
            q1 = median = q3 = values[0]
        summary[pair] = {
            "count": len(values),
            "min": values[0],
            "q1": q1,
            "median": median,
            "q3": q3,
            "max": values[-1],
            "mean": statistics.mean(values),
        }
    return summary


def static_baseline_overlap(scenario: Scenario,
                            radius_m: float = OVERLAP_RADIUS_M) -> dict:
    """Directional overlap between the zero-load fastest routes of each line.

    Keys are "observer->reference" line names; intra-line entries are exactly
    1.0 because both directions use the identical route.
    """
    free_flow = TrafficState(scenario.graph)
    fastest = {}
    for name in sorted(scenario.lines):
        route = candidate_routes(scenario.graph, free_flow,
                                 scenario.line_origin(name),
                                 scenario.line_destination(name), k=1)[0]
        fastest[name] = resample_polyline(list(route.polyline),
                                          RESAMPLE_SPACING_M)
    result = {}
    for a in sorted(fastest):
        for b in sorted(fastest):
            result[f"{a}->{b}"] = pairwise_overlap(fastest[a], fastest[b],
                                                   radius_m)
    return result


def trip_stats(trips: list[TripRecord], scenario: Scenario,
               duration_radius_m: float = 50.0) -> dict:
    """Counts and duration stats per line x {morning, afternoon} start bucket."""
    table: dict[str, dict[str, dict]] = {
        line: {bucket: {"count": 0, "mean_duration_s": 0.0, "durations": []}
               for bucket in ("morning", "afternoon")}
        for line in sorted(scenario.lines)
    }
    for trip in trips:
        if trip.state not in ("ended-manual", "ended-auto"):
            continue
        hour = scenario.time_of_day_h(trip.start_ts)
        bucket = "morning" if hour < MORNING_END_H else "afternoon"
        cell = table[trip.line][bucket]
        cell["durations"].append(trip.duration_s(duration_radius_m))
    for line in table:
        for cell in table[line].values():
            cell["count"] = len(cell["durations"])
            if cell["durations"]:
                cell["mean_duration_s"] = statistics.mean(cell["durations"])
    return table


def write_report(trips: list[TripRecord], scenario: Scenario,
                 out_dir: str | Path,
                 duration_radius_m: float = 50.0) -> dict:
    """Emit trips.csv, overlap.csv, and overlap_summary.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "trips.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["trip_id", "vehicle_id", "line", "state", "start_ts",
                         "end_ts", "duration_s", "valid", "reason"])
        for trip in sorted(trips, key=lambda t: t.trip_id):
            if trip.state in ("ended-manual", "ended-auto"):
                valid, reason = classify_trip(
                    trip, scenario.line_origin(trip.line),
                    scenario.line_destination(trip.line))
                duration = trip.duration_s(duration_radius_m)
            else:
                valid, reason, duration = False, "not-ended", ""
            writer.writerow([trip.trip_id, trip.vehicle_id, trip.line,
                             trip.state, trip.start_ts, trip.end_ts, duration,
                             valid, reason or ""])

    valid_trips = [t for t in trips
                   if t.state in ("ended-manual", "ended-auto")
                   and classify_trip(t, scenario.line_origin(t.line),
                                     scenario.line_destination(t.line))[0]]
    observations = fleet_overlap_report(valid_trips)
    with open(out / "overlap.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["observer", "reference", "pair", "fraction",
                         "window_start", "window_end"])
        for obs in observations:
            writer.writerow([obs.observer, obs.reference, obs.pair,
                             obs.fraction, obs.window[0], obs.window[1]])

    summary = {
        "pairs": summarize_observations(observations),
        "baseline": static_baseline_overlap(scenario),
        "trip_stats": trip_stats(valid_trips, scenario, duration_radius_m),
        "trips_total": len(trips),
        "trips_valid": len(valid_trips),
    }
    with open(out / "overlap_summary.json", "w") as f:
        json.dump(summary, f, indent=1)
    return summary
