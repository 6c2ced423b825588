"""Traffic-flow route-selection QUBO: construction and sample decoding.

The objective couples a shared-point congestion cost with a one-route-per-
vehicle penalty:  sum_p cost(p) + lambda * sum_i (sum_j q_ij - 1)^2.
In the default squared-sum mode cost(p) = (sum of the variables whose routes
contain p)^2, which is what actually de-conflicts vehicles; linear-sum mode
keeps the purely linear reading as an option.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import EmptyFleet
from .geo import GeoPoint, haversine_distance, resample_polyline
from .routing import CandidateRoute

RESAMPLE_SPACING_M = 25.0
POINT_MATCH_RADIUS_M = 1.0


@dataclass(frozen=True)
class QuboConfig:
    lam: float | None = None  # None -> default_lambda at build time
    cost_mode: str = "squared-sum"  # squared-sum | linear-sum
    granularity: str = "graph-node"  # graph-node | resampled-point

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.cost_mode not in ("squared-sum", "linear-sum"):
            raise ValueError(f"unknown cost mode {self.cost_mode!r}")
        if self.granularity not in ("graph-node", "resampled-point"):
            raise ValueError(f"unknown granularity {self.granularity!r}")


@dataclass
class VariableMap:
    """Bijection between contiguous variable indices and (vehicle, route) pairs."""

    pairs: list[tuple[str, int]]
    _index: dict[tuple[str, int], int] = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {pair: i for i, pair in enumerate(self.pairs)}
        if len(self._index) != len(self.pairs):
            raise ValueError("duplicate (vehicle, route) pair")

    def __len__(self) -> int:
        return len(self.pairs)

    def index_of(self, vehicle_id: str, route_index: int) -> int:
        return self._index[(vehicle_id, route_index)]

    def pair_of(self, index: int) -> tuple[str, int]:
        return self.pairs[index]

    def vehicles(self) -> list[str]:
        seen: list[str] = []
        for vid, _ in self.pairs:
            if vid not in seen:
                seen.append(vid)
        return seen

    def indices_for_vehicle(self, vehicle_id: str) -> list[int]:
        return [i for i, (vid, _) in enumerate(self.pairs) if vid == vehicle_id]


@dataclass
class BinaryQuadraticModel:
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def add_linear(self, i: int, w: float) -> None:
        self.linear[i] = self.linear.get(i, 0.0) + w

    def add_quadratic(self, i: int, j: int, w: float) -> None:
        if i == j:
            raise ValueError("self-pair in quadratic term")
        key = (i, j) if i < j else (j, i)
        self.quadratic[key] = self.quadratic.get(key, 0.0) + w

    def num_variables(self) -> int:
        idx = set(self.linear)
        for i, j in self.quadratic:
            idx.add(i)
            idx.add(j)
        return max(idx) + 1 if idx else 0

    def energy(self, sample: list[int]) -> float:
        e = self.offset
        for i, w in self.linear.items():
            if sample[i]:
                e += w
        for (i, j), w in self.quadratic.items():
            if sample[i] and sample[j]:
                e += w
        return e

    def to_json(self, varmap: VariableMap | None = None) -> dict:
        obj = {
            "linear": {str(i): w for i, w in sorted(self.linear.items())},
            "quadratic": [[i, j, w] for (i, j), w in sorted(self.quadratic.items())],
            "offset": self.offset,
        }
        if varmap is not None:
            obj["varmap"] = [[vid, j] for vid, j in varmap.pairs]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> tuple["BinaryQuadraticModel", "VariableMap | None"]:
        bqm = cls(
            linear={int(i): float(w) for i, w in obj["linear"].items()},
            quadratic={(int(i), int(j)): float(w) for i, j, w in obj["quadratic"]},
            offset=float(obj["offset"]),
        )
        varmap = None
        if obj.get("varmap") is not None:
            varmap = VariableMap([(vid, int(j)) for vid, j in obj["varmap"]])
        return bqm, varmap

    def dumps(self, varmap: VariableMap | None = None) -> str:
        return json.dumps(self.to_json(varmap))


@dataclass
class OverlapIndex:
    """Shared point id -> set of variable indices whose routes contain it."""

    shared: dict[str, frozenset[int]]

    def __len__(self) -> int:
        return len(self.shared)


@dataclass
class Assignment:
    routes: dict[str, int]  # vehicle id -> chosen route index
    energy: float
    feasible: bool
    fallback_used: bool = False


def build_variable_map(routes: list[CandidateRoute]) -> VariableMap:
    """Vehicles ordered by id; within a vehicle, routes by ascending travel time."""
    by_vehicle: dict[str, list[CandidateRoute]] = {}
    for r in routes:
        by_vehicle.setdefault(r.vehicle_id, []).append(r)
    pairs: list[tuple[str, int]] = []
    for vid in sorted(by_vehicle):
        ordered = sorted(by_vehicle[vid],
                         key=lambda r: (r.expected_travel_time_s, r.route_index))
        pairs.extend((vid, r.route_index) for r in ordered)
    return VariableMap(pairs)


def _route_points(route: CandidateRoute, granularity: str) -> list:
    if granularity == "graph-node":
        return list(route.node_path)
    return resample_polyline(list(route.polyline), RESAMPLE_SPACING_M)


def build_overlap_index(routes: list[CandidateRoute],
                        granularity: str = "graph-node",
                        varmap: VariableMap | None = None) -> OverlapIndex:
    """Points appearing in at least two candidate routes, any vehicles."""
    if varmap is None:
        varmap = build_variable_map(routes)
    containing: dict[str, set[int]] = {}
    if granularity == "graph-node":
        for route in routes:
            var = varmap.index_of(route.vehicle_id, route.route_index)
            # dict.fromkeys, not set(): path-order iteration keeps the model's
            # term order (and hence solver tie-breaking) hash-seed independent
            for node in dict.fromkeys(route.node_path):
                containing.setdefault(node, set()).add(var)
    else:
        # cluster resampled points to representatives within the match radius
        reps: list[GeoPoint] = []
        grid: dict[tuple[int, int], list[int]] = {}

        def rep_id(p: GeoPoint) -> int:
            cell = (round(p.lat * 40000), round(p.lon * 40000))
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for ridx in grid.get((cell[0] + dx, cell[1] + dy), []):
                        if haversine_distance(p, reps[ridx]) < POINT_MATCH_RADIUS_M:
                            return ridx
            reps.append(p)
            grid.setdefault(cell, []).append(len(reps) - 1)
            return len(reps) - 1

        for route in routes:
            var = varmap.index_of(route.vehicle_id, route.route_index)
            ids = {rep_id(p) for p in _route_points(route, granularity)}
            for rid in ids:
                containing.setdefault(f"p{rid}", set()).add(var)
    shared = {pid: frozenset(vars_) for pid, vars_ in containing.items()
              if len(vars_) >= 2}
    return OverlapIndex(shared)


def default_lambda(routes: list[CandidateRoute], overlap_index: OverlapIndex) -> float:
    """1 + sum of |B(p)|^2: strictly above any achievable total overlap cost."""
    return 1.0 + sum(len(b) ** 2 for b in overlap_index.shared.values())


def build_tfo_qubo(routes: list[CandidateRoute], config: QuboConfig = QuboConfig()
                   ) -> tuple[BinaryQuadraticModel, VariableMap, OverlapIndex]:
    if not routes:
        raise EmptyFleet("no candidate routes supplied")
    varmap = build_variable_map(routes)
    overlap = build_overlap_index(routes, config.granularity, varmap)
    lam = config.lam if config.lam is not None else default_lambda(routes, overlap)

    bqm = BinaryQuadraticModel()
    # shared-point cost
    for members in overlap.shared.values():
        ordered = sorted(members)
        for i in ordered:
            bqm.add_linear(i, 1.0)
        if config.cost_mode == "squared-sum":
            for a in range(len(ordered)):
                for b in range(a + 1, len(ordered)):
                    bqm.add_quadratic(ordered[a], ordered[b], 2.0)
    # one-route-per-vehicle penalty: lam * (sum_j q - 1)^2 per vehicle
    for vid in varmap.vehicles():
        idx = varmap.indices_for_vehicle(vid)
        bqm.offset += lam
        for i in idx:
            bqm.add_linear(i, -lam)
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                bqm.add_quadratic(idx[a], idx[b], 2.0 * lam)
    return bqm, varmap, overlap


def decode_solution(sample: list[int], varmap: VariableMap,
                    bqm: BinaryQuadraticModel) -> Assignment:
    """Map a binary sample back to per-vehicle route choices."""
    if len(sample) != len(varmap):
        raise ValueError("sample length does not match variable count")
    routes: dict[str, int] = {}
    feasible = True
    for vid in varmap.vehicles():
        set_routes = [varmap.pair_of(i)[1] for i in varmap.indices_for_vehicle(vid)
                      if sample[i]]
        if len(set_routes) == 1:
            routes[vid] = set_routes[0]
        else:
            feasible = False
    return Assignment(routes=routes if feasible else {},
                      energy=bqm.energy(sample), feasible=feasible)
