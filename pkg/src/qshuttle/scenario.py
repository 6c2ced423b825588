"""Scenario configuration: road network, bus lines, fleet, background traffic.

The shipped shared-corridor scenario has three one-way eastbound roads and
three one-way westbound roads between a west-side pickup area and an east-side
venue. The fastest eastbound road is a corridor both the red and blue lines
prefer when routed statically, so de-confliction has something to do; parallel
roads sit 300 m apart, well beyond the 50 m overlap radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .geo import GeoPoint
from .roadgraph import RoadEdge, RoadGraph

BASE_LAT = 38.75
BASE_LON = -9.15
M_PER_DEG_LAT = 6_371_009.0 * math.pi / 180.0

LINE_TAGS = ("red", "blue", "black")


def xy_to_geo(x_m: float, y_m: float,
              base_lat: float = BASE_LAT, base_lon: float = BASE_LON) -> GeoPoint:
    lat = base_lat + y_m / M_PER_DEG_LAT
    lon = base_lon + x_m / (M_PER_DEG_LAT * math.cos(math.radians(base_lat)))
    return GeoPoint(lat, lon)


@dataclass(frozen=True)
class LineConfig:
    name: str
    origin_node: str
    destination_node: str
    headway_s: float = 300.0


@dataclass
class Scenario:
    name: str
    graph: RoadGraph
    lines: dict[str, LineConfig]
    fleet: dict[str, str]  # vehicle id -> line name
    start_hour: float = 8.0
    end_hour: float = 18.0
    background_by_hour: dict[int, float] = field(default_factory=dict)
    seed: int = 7

    def __post_init__(self):
        for line in self.lines.values():
            if line.origin_node not in self.graph.nodes:
                raise ValueError(f"unknown origin node {line.origin_node}")
            if line.destination_node not in self.graph.nodes:
                raise ValueError(f"unknown destination node {line.destination_node}")
        for vid, line in self.fleet.items():
            if line not in self.lines:
                raise ValueError(f"vehicle {vid} assigned to unknown line {line}")

    def line_origin(self, name: str) -> GeoPoint:
        return self.graph.nodes[self.lines[name].origin_node]

    def line_destination(self, name: str) -> GeoPoint:
        return self.graph.nodes[self.lines[name].destination_node]

    def background_at(self, sim_time_s: float) -> float:
        """Background utilization fraction for the hour containing sim_time_s."""
        hour = int(self.start_hour + sim_time_s / 3600.0)
        return self.background_by_hour.get(hour, 0.5)

    def duration_s(self) -> float:
        return (self.end_hour - self.start_hour) * 3600.0

    def time_of_day_h(self, sim_time_s: float) -> float:
        return self.start_hour + sim_time_s / 3600.0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "graph": self.graph.to_json(),
            "lines": [{"name": l.name, "origin_node": l.origin_node,
                       "destination_node": l.destination_node,
                       "headway_s": l.headway_s}
                      for l in self.lines.values()],
            "fleet": dict(self.fleet),
            "start_hour": self.start_hour,
            "end_hour": self.end_hour,
            "background_by_hour": {str(h): u
                                   for h, u in self.background_by_hour.items()},
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        lines = {l["name"]: LineConfig(l["name"], l["origin_node"],
                                       l["destination_node"],
                                       l.get("headway_s", 300.0))
                 for l in obj["lines"]}
        return cls(
            name=obj["name"],
            graph=RoadGraph.from_json(obj["graph"]),
            lines=lines,
            fleet=dict(obj["fleet"]),
            start_hour=obj.get("start_hour", 8.0),
            end_hour=obj.get("end_hour", 18.0),
            background_by_hour={int(h): u for h, u
                                in obj.get("background_by_hour", {}).items()},
            seed=obj.get("seed", 7),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        with open(path) as f:
            return cls.from_json(json.load(f))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1)


CORRIDOR_LENGTH_M = 12_000.0


def _add_road(nodes: dict, edges: list, prefix: str, y_m: float, speed_ms: float,
              capacity: float, length_m: float = CORRIDOR_LENGTH_M,
              spacing_m: float = 500.0,
              westbound: bool = False) -> list[str]:
    """One-way subdivided road; returns node ids from road start to road end."""
    count = int(length_m / spacing_m)
    ids = []
    for i in range(count + 1):
        x = length_m - i * spacing_m if westbound else i * spacing_m
        nid = f"{prefix}_{i}"
        nodes[nid] = xy_to_geo(x, y_m)
        ids.append(nid)
    t0 = spacing_m / speed_ms
    for a, b in zip(ids, ids[1:]):
        edges.append(RoadEdge(a, b, spacing_m, t0, capacity, oneway=True))
    return ids


def build_shared_corridor_graph(n_parallel: int = 3) -> RoadGraph:
    """Parallel one-way eastbound and westbound roads joined by end connectors."""
    if not 2 <= n_parallel <= 6:
        raise ValueError("n_parallel must be in [2, 6]")
    nodes: dict[str, GeoPoint] = {}
    edges: list[RoadEdge] = []
    speeds = [16.0, 15.0, 14.8, 14.6, 14.5, 14.4]
    caps = [1800.0, 1200.0, 1200.0, 1200.0, 1200.0, 1200.0]

    east_roads = [
        _add_road(nodes, edges, f"e{r}", 300.0 * r, speeds[r], caps[r])
        for r in range(n_parallel)
    ]
    west_roads = [
        _add_road(nodes, edges, f"w{r}", -300.0 * (r + 1), speeds[r], caps[r],
                  westbound=True)
        for r in range(n_parallel)
    ]

    def connect(a: str, b: str, length: float, speed: float = 20.0):
        edges.append(RoadEdge(a, b, length, length / speed, 1500.0, oneway=False))

    # end connectors between parallel roads (two-way local streets), plus
    # cross streets every 2 km so routes can diverge throughout the corridor
    cross_indices = tuple(range(0, len(east_roads[0]), 4)) + (len(east_roads[0]) - 1,)
    for r in range(n_parallel - 1):
        for i in cross_indices:
            connect(east_roads[r][i], east_roads[r + 1][i], 300.0)
            connect(west_roads[r][i], west_roads[r + 1][i], 300.0)
    # cross-links between the east and west systems at both ends
    connect(east_roads[0][0], west_roads[0][-1], 300.0)
    connect(east_roads[0][-1], west_roads[0][0], 300.0)

    # stops and venue
    nodes["stop_red"] = xy_to_geo(-400.0, 150.0)
    nodes["stop_blue"] = xy_to_geo(-400.0, 450.0)
    nodes["stop_black"] = xy_to_geo(-400.0, -450.0)
    nodes["conf"] = xy_to_geo(CORRIDOR_LENGTH_M + 400.0, -150.0)
    connect("stop_red", east_roads[0][0], 430.0, speed=13.0)
    connect("stop_blue", east_roads[min(1, n_parallel - 1)][0], 430.0, speed=13.0)
    connect("stop_black", west_roads[0][-1], 430.0, speed=13.0)
    connect("conf", east_roads[0][-1], 430.0, speed=13.0)
    connect("conf", west_roads[0][0], 430.0, speed=13.0)
    connect("stop_red", "stop_blue", 300.0, speed=10.0)
    connect("stop_red", "stop_black", 600.0, speed=10.0)
    return RoadGraph(nodes=nodes, edges=edges)


def build_shared_corridor_scenario(n_buses: int = 9, n_parallel: int = 3,
                                   headway_s: float = 60.0,
                                   start_hour: float = 8.0,
                                   end_hour: float = 18.0,
                                   seed: int = 7) -> Scenario:
    # A 60 s headway batches same-line departures close enough together that
    # their near-term route windows overlap spatially, so the optimizer can
    # spread a line's buses across the parallel roads.
    graph = build_shared_corridor_graph(n_parallel)
    lines = {
        "red": LineConfig("red", "stop_red", "conf", headway_s),
        "blue": LineConfig("blue", "stop_blue", "conf", headway_s),
        "black": LineConfig("black", "conf", "stop_black", headway_s),
    }
    fleet = {f"bus-{i + 1}": LINE_TAGS[i % 3] for i in range(n_buses)}
    background = {8: 0.85, 9: 0.9, 10: 0.8, 11: 0.7, 12: 0.6, 13: 0.6,
                  14: 0.65, 15: 0.7, 16: 0.85, 17: 0.9}
    return Scenario(
        name="shared-corridor",
        graph=graph,
        lines=lines,
        fleet=fleet,
        start_hour=start_hour,
        end_hour=end_hour,
        background_by_hour=background,
        seed=seed,
    )
