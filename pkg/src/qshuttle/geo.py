"""Great-circle geometry: points, boxes, and polyline arc-length utilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegeneratePolyline

EARTH_RADIUS_M = 6_371_009.0


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError("GeoPoint coordinates must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of range [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of range [-180, 180]")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned exclusion region; no antimeridian wrap."""

    south_west: GeoPoint
    north_east: GeoPoint

    def __post_init__(self):
        if self.south_west.lat > self.north_east.lat:
            raise ValueError("south_west.lat must be <= north_east.lat")
        if self.south_west.lon > self.north_east.lon:
            raise ValueError("south_west.lon must be <= north_east.lon")

    def to_json(self) -> dict:
        return {
            "sw": {"lat": self.south_west.lat, "lon": self.south_west.lon},
            "ne": {"lat": self.north_east.lat, "lon": self.north_east.lon},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BoundingBox":
        return cls(
            south_west=GeoPoint(obj["sw"]["lat"], obj["sw"]["lon"]),
            north_east=GeoPoint(obj["ne"]["lat"], obj["ne"]["lon"]),
        )


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    if a.lat == b.lat and a.lon == b.lon:
        return 0.0
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = (
        math.sin(dphi / 2.0) ** 2
        + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    )
    # clamp against rounding for near-antipodal pairs
    h = min(1.0, max(0.0, h))
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def point_in_box(p: GeoPoint, box: BoundingBox) -> bool:
    """Closed-interval membership: the boundary counts as inside."""
    return (
        box.south_west.lat <= p.lat <= box.north_east.lat
        and box.south_west.lon <= p.lon <= box.north_east.lon
    )


def cumulative_lengths(polyline: list[GeoPoint]) -> list[float]:
    """Arc length in meters from the first point to each vertex."""
    acc = [0.0]
    for a, b in zip(polyline, polyline[1:]):
        acc.append(acc[-1] + haversine_distance(a, b))
    return acc


def polyline_length(polyline: list[GeoPoint]) -> float:
    return cumulative_lengths(polyline)[-1]


def _lerp(a: GeoPoint, b: GeoPoint, t: float) -> GeoPoint:
    return GeoPoint(a.lat + (b.lat - a.lat) * t, a.lon + (b.lon - a.lon) * t)


def point_at_arc(polyline: list[GeoPoint], arc: float) -> GeoPoint:
    """Point at the given arc length along the polyline, clamped to its ends.

    Interpolation is linear in lat/lon, which stays on the drawn polyline.
    """
    if len(polyline) < 2:
        return polyline[0]
    acc = cumulative_lengths(polyline)
    total = acc[-1]
    if arc <= 0.0:
        return polyline[0]
    if arc >= total:
        return polyline[-1]
    for i in range(1, len(acc)):
        if arc <= acc[i]:
            seg_len = acc[i] - acc[i - 1]
            if seg_len == 0.0:
                return polyline[i]
            t = (arc - acc[i - 1]) / seg_len
            return _lerp(polyline[i - 1], polyline[i], t)
    return polyline[-1]


def nearest_vertex_arc(polyline: list[GeoPoint], p: GeoPoint) -> tuple[float, float]:
    """Arc length of the polyline vertex nearest to p, and its distance.

    Returns (arc_m, distance_m). Ties go to the earlier vertex.
    """
    acc = cumulative_lengths(polyline)
    best_arc = 0.0
    best_d = math.inf
    for arc, vertex in zip(acc, polyline):
        d = haversine_distance(p, vertex)
        if d < best_d:
            best_d = d
            best_arc = arc
    return best_arc, best_d


def point_to_polyline_distance(p: GeoPoint, polyline: list[GeoPoint]) -> float:
    """Distance in meters from p to the nearest point on any segment.

    Segments are treated as straight in a local equirectangular frame, which
    matches how positions are interpolated along the polyline.
    """
    if len(polyline) == 1:
        return haversine_distance(p, polyline[0])
    mlat = EARTH_RADIUS_M * math.pi / 180.0  # meters per degree of latitude
    coslat = math.cos(math.radians(p.lat))
    px, py = p.lon * coslat * mlat, p.lat * mlat
    best = math.inf
    for a, b in zip(polyline, polyline[1:]):
        ax, ay = a.lon * coslat * mlat, a.lat * mlat
        bx, by = b.lon * coslat * mlat, b.lat * mlat
        dx, dy = bx - ax, by - ay
        denom = dx * dx + dy * dy
        t = 0.0 if denom == 0.0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
        qx, qy = ax + t * dx, ay + t * dy
        best = min(best, math.hypot(px - qx, py - qy))
    return best


def resample_polyline(polyline: list[GeoPoint], spacing: float) -> list[GeoPoint]:
    """Resample at arc-length multiples of spacing, keeping both endpoints.

    Consecutive output points are at most spacing + 1 m apart.
    """
    if len(polyline) < 2:
        raise ValueError("polyline needs at least 2 points")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    total = polyline_length(polyline)
    if total == 0.0:
        raise DegeneratePolyline("polyline has zero length")
    out = [polyline[0]]
    arc = spacing
    while arc < total:
        out.append(point_at_arc(polyline, arc))
        arc += spacing
    last = polyline[-1]
    if haversine_distance(out[-1], last) > 0.0 or len(out) == 1:
        out.append(last)
    return out
