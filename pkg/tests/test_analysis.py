"""Overlap metric, observation grouping, baseline, and trip statistics tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import xy_to_geo
from qshuttle.analysis import (
    OverlapObservation,
    concurrent_window,
    fleet_overlap_report,
    line_pair_tag,
    pairwise_overlap,
    static_baseline_overlap,
    summarize_observations,
    trip_stats,
)
from qshuttle.errors import EmptyHistory
from qshuttle.geo import resample_polyline
from qshuttle.routing import CandidateRoute
from qshuttle.scenario import build_shared_corridor_scenario
from qshuttle.service import TripRecord


def straight(y_m: float, x0: float = 0.0, x1: float = 1000.0, step: float = 25.0):
    n = int((x1 - x0) / step)
    return [xy_to_geo(x0 + i * step, y_m) for i in range(n + 1)]


class TestPairwiseOverlap:
    def test_identical_polylines(self):
        line = straight(0.0)
        assert pairwise_overlap(line, line) == 1.0

    def test_disjoint_polylines(self):
        assert pairwise_overlap(straight(0.0), straight(200.0)) == 0.0

    def test_half_coincident(self):
        history = straight(0.0, 0.0, 1000.0)
        route = straight(0.0, 500.0, 1500.0)
        # half the history lies on the route; the 50 m radius can also catch
        # the two 25 m samples just before the route start
        assert abs(pairwise_overlap(history, route) - 0.5) <= 3.0 / len(history)

    def test_directional_asymmetry(self):
        short = straight(0.0, 0.0, 500.0)
        long = straight(0.0, 0.0, 2000.0)
        assert pairwise_overlap(short, long) == 1.0
        assert pairwise_overlap(long, short) < 1.0

    def test_empty_history_raises(self):
        with pytest.raises(EmptyHistory):
            pairwise_overlap([], straight(0.0))

    def test_empty_route_is_zero(self):
        assert pairwise_overlap(straight(0.0), []) == 0.0

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(ValueError):
            pairwise_overlap(straight(0.0), straight(0.0), radius_m=0.0)

    def test_monotone_in_radius(self):
        history, route = straight(0.0), straight(60.0)
        fractions = [pairwise_overlap(history, route, radius_m=r)
                     for r in (10.0, 50.0, 61.0, 200.0)]
        assert fractions == sorted(fractions)
        assert fractions[0] == 0.0 and fractions[-1] == 1.0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 5000), st.floats(-2000, 2000)),
                    min_size=2, max_size=8))
    def test_self_overlap_is_one(self, coords):
        points = [xy_to_geo(x, y) for x, y in coords]
        try:
            line = resample_polyline(points, 25.0)
        except Exception:
            return  # degenerate zero-length polyline
        assert pairwise_overlap(line, line) == 1.0


class TestObservations:
    def test_validation(self):
        with pytest.raises(ValueError):
            OverlapObservation("v1", "v1", "red-red", 0.5, (0.0, 60.0))
        with pytest.raises(ValueError):
            OverlapObservation("v1", "v2", "red-red", 1.5, (0.0, 60.0))

    def test_line_pair_tag_is_canonical(self):
        assert line_pair_tag("red", "blue") == "blue-red"
        assert line_pair_tag("blue", "red") == "blue-red"
        assert line_pair_tag("red", "red") == "red-red"

    def test_summary_statistics(self):
        obs = [OverlapObservation("v1", "v2", "red-red", f, (0.0, 100.0))
               for f in (0.0, 0.25, 0.5, 0.75, 1.0)]
        summary = summarize_observations(obs)["red-red"]
        assert summary["count"] == 5
        assert summary["min"] == 0.0 and summary["max"] == 1.0
        assert summary["q1"] == 0.25
        assert summary["median"] == 0.5
        assert summary["q3"] == 0.75
        assert summary["mean"] == 0.5


def make_trip(trip_id, vehicle_id, line, start, end, polyline):
    trip = TripRecord(trip_id=trip_id, vehicle_id=vehicle_id, line=line,
                      origin=polyline[0], destination=polyline[-1])
    trip.activate(start)
    span = end - start
    for i, p in enumerate(polyline):
        trip.history.append((start + span * i / (len(polyline) - 1), p))
    route = CandidateRoute(vehicle_id, 0,
                           tuple(f"n{i}" for i in range(len(polyline))),
                           tuple(polyline), span)
    trip.route_history.append((start, route, "static", True))
    trip.end(end, manual=True)
    return trip


class TestFleetReport:
    def test_single_trip_yields_no_pairs(self):
        trips = [make_trip("t1", "v1", "red", 0.0, 600.0, straight(0.0))]
        assert fleet_overlap_report(trips) == []

    def test_concurrent_identical_routes(self):
        trips = [make_trip("t1", "v1", "red", 0.0, 600.0, straight(0.0)),
                 make_trip("t2", "v2", "red", 100.0, 700.0, straight(0.0))]
        obs = fleet_overlap_report(trips)
        assert len(obs) == 2
        assert all(o.fraction == 1.0 for o in obs)
        assert {o.pair for o in obs} == {"red-red"}

    def test_non_concurrent_trips_skipped(self):
        trips = [make_trip("t1", "v1", "red", 0.0, 600.0, straight(0.0)),
                 make_trip("t2", "v2", "blue", 900.0, 1500.0, straight(0.0))]
        assert fleet_overlap_report(trips) == []

    def test_same_vehicle_never_compared(self):
        trips = [make_trip("t1", "v1", "red", 0.0, 600.0, straight(0.0)),
                 make_trip("t2", "v1", "red", 300.0, 900.0, straight(0.0))]
        assert fleet_overlap_report(trips) == []

    def test_observation_count_matches_ordered_pairs(self):
        trips = [make_trip(f"t{i}", f"v{i}", "red", 0.0, 600.0, straight(0.0))
                 for i in range(4)]
        assert len(fleet_overlap_report(trips)) == 4 * 3


@pytest.fixture(scope="module")
def scenario():
    return build_shared_corridor_scenario(n_buses=3)


class TestBaselineAndStats:
    def test_intra_line_baseline_is_one(self, scenario):
        baseline = static_baseline_overlap(scenario)
        for line in scenario.lines:
            assert baseline[f"{line}->{line}"] == 1.0

    def test_shared_corridor_baseline_is_high(self, scenario):
        baseline = static_baseline_overlap(scenario)
        assert baseline["red->blue"] >= 0.6
        assert baseline["blue->red"] >= 0.6

    def test_opposite_directions_barely_overlap(self, scenario):
        baseline = static_baseline_overlap(scenario)
        assert baseline["black->red"] < 0.2
        assert baseline["red->black"] < 0.2

    def test_empty_trip_table(self, scenario):
        table = trip_stats([], scenario)
        for line in scenario.lines:
            for bucket in ("morning", "afternoon"):
                assert table[line][bucket]["count"] == 0

    def test_single_morning_trip(self, scenario):
        # 09:00 start = 3600 s into the 08:00 service day
        trip = make_trip("t1", "v1", "red", 3600.0, 4200.0, straight(0.0))
        cell = trip_stats([trip], scenario)["red"]["morning"]
        assert cell["count"] == 1
        # duration stops at the first fix inside the 50 m recording radius,
        # which arrives up to two 25 m samples before the endpoint fix
        assert 560.0 <= cell["mean_duration_s"] <= 600.0

    def test_bucket_boundary_uses_start_time(self, scenario):
        before_noon = (11 + 59 / 60 - 8) * 3600.0
        trip = make_trip("t1", "v1", "red", before_noon, before_noon + 900.0,
                         straight(0.0))
        table = trip_stats([trip], scenario)
        assert table["red"]["morning"]["count"] == 1
        assert table["red"]["afternoon"]["count"] == 0
