"""Desk-scale fleet navigation: routing, traffic simulation, QUBO de-confliction."""

from .geo import BoundingBox, GeoPoint, haversine_distance, point_in_box
from .qubo import BinaryQuadraticModel, QuboConfig, build_tfo_qubo, decode_solution
from .routing import CandidateRoute, candidate_routes, time_filter

__all__ = [
    "BoundingBox",
    "GeoPoint",
    "haversine_distance",
    "point_in_box",
    "BinaryQuadraticModel",
    "QuboConfig",
    "build_tfo_qubo",
    "decode_solution",
    "CandidateRoute",
    "candidate_routes",
    "time_filter",
]
