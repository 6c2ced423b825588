"""Synthetic road network standing in for an external routing provider."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from .errors import SnapFailure
from .geo import GeoPoint, haversine_distance

SNAP_RADIUS_M = 500.0


@dataclass(frozen=True)
class RoadEdge:
    from_node: str
    to_node: str
    length_m: float
    free_flow_time_s: float
    capacity_vph: float
    oneway: bool = False

    def __post_init__(self):
        if self.length_m <= 0:
            raise ValueError("edge length must be positive")
        if self.free_flow_time_s <= 0:
            raise ValueError("free-flow time must be positive")
        if self.capacity_vph <= 0:
            raise ValueError("capacity must be positive")


@dataclass
class RoadGraph:
    nodes: dict[str, GeoPoint]
    edges: list[RoadEdge]
    _nx: nx.DiGraph = field(init=False, repr=False)

    def __post_init__(self):
        for e in self.edges:
            if e.from_node not in self.nodes or e.to_node not in self.nodes:
                raise ValueError(f"edge {e.from_node}->{e.to_node} references unknown node")
        g = nx.DiGraph()
        for nid in self.nodes:
            g.add_node(nid)
        for e in self.edges:
            g.add_edge(e.from_node, e.to_node, edge=e)
            if not e.oneway:
                back = RoadEdge(e.to_node, e.from_node, e.length_m,
                                e.free_flow_time_s, e.capacity_vph, oneway=True)
                g.add_edge(e.to_node, e.from_node, edge=back)
        object.__setattr__(self, "_nx", g)

    @property
    def graph(self) -> nx.DiGraph:
        """Directed view with an 'edge' attribute holding the RoadEdge."""
        return self._nx

    def directed_edges(self):
        """All traversable (from, to, RoadEdge) triples, both directions of two-way roads."""
        for u, v, data in self._nx.edges(data=True):
            yield u, v, data["edge"]

    def edge_between(self, u: str, v: str) -> RoadEdge:
        return self._nx.edges[u, v]["edge"]

    def snap_to_node(self, p: GeoPoint, radius_m: float = SNAP_RADIUS_M) -> str:
        """Nearest node id by haversine, or SnapFailure beyond radius_m."""
        best_id, best_d = None, math.inf
        for nid in sorted(self.nodes):
            d = haversine_distance(p, self.nodes[nid])
            if d < best_d:
                best_id, best_d = nid, d
        if best_id is None or best_d > radius_m:
            raise SnapFailure(f"no node within {radius_m} m of ({p.lat}, {p.lon})")
        return best_id

    def polyline_for(self, node_path: list[str]) -> list[GeoPoint]:
        return [self.nodes[n] for n in node_path]

    def check_connected_on(self, terminals: list[str]) -> bool:
        """True when every terminal can reach every other terminal."""
        for a in terminals:
            reach = nx.descendants(self._nx, a) | {a}
            if any(b not in reach for b in terminals):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": nid, "lat": p.lat, "lon": p.lon}
                      for nid, p in sorted(self.nodes.items())],
            "edges": [{"from": e.from_node, "to": e.to_node, "length_m": e.length_m,
                       "t0_s": e.free_flow_time_s, "capacity_vph": e.capacity_vph,
                       "oneway": e.oneway}
                      for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RoadGraph":
        nodes = {n["id"]: GeoPoint(n["lat"], n["lon"]) for n in obj["nodes"]}
        edges = [RoadEdge(e["from"], e["to"], e["length_m"], e["t0_s"],
                          e["capacity_vph"], bool(e.get("oneway", False)))
                 for e in obj["edges"]]
        return cls(nodes=nodes, edges=edges)

    @classmethod
    def load(cls, path: str | Path) -> "RoadGraph":
        with open(path) as f:
            return cls.from_json(json.load(f))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1)
