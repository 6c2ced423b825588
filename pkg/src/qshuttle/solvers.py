"""Pluggable QUBO solvers: exhaustive, simulated annealing, tabu-hybrid, and
a mock remote backend with latency/failure injection, plus the fallback wrapper.

Iteration counts are derived deterministically from the time budget (via a
fixed flips-per-millisecond cost model) so a fixed seed always yields the
same best sample; a wall-clock guard still stops pathological runs early.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import RemoteError, SolveTimeout, TooLarge
from .qubo import Assignment, BinaryQuadraticModel, VariableMap, decode_solution

BRUTE_FORCE_LIMIT = 24
FLIPS_PER_MS = 400  # conservative single-flip throughput on desk hardware
SA_SWEEPS_PER_RESTART = 64
SA_FINAL_TEMP_FACTOR = 1e-3
SUBPROBLEM_SIZE = 16
SUBSOLVE_COST_FLIPS = 2000  # flips-equivalent charge per exact sub-solve


@dataclass(frozen=True)
class SolveRequest:
    bqm: BinaryQuadraticModel
    budget_ms: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.budget_ms <= 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class SolveResult:
    sample: tuple[int, ...]
    energy: float
    samples_evaluated: int
    wall_time_ms: float
    solver: str


def _num_vars(bqm: BinaryQuadraticModel) -> int:
    return bqm.num_variables()


def _dense_matrix(bqm: BinaryQuadraticModel, n: int) -> np.ndarray:
    m = np.zeros((n, n))
    for i, w in bqm.linear.items():
        m[i, i] = w
    for (i, j), w in bqm.quadratic.items():
        m[i, j] += w / 2.0
        m[j, i] += w / 2.0
    return m


def brute_force_solve(req: SolveRequest) -> SolveResult:
    """Exhaustive minimum; lexicographically first sample among ties.

    Samples are enumerated with variable 0 as the high bit, so enumeration
    order is exactly lexicographic order of the sample vectors.
    """
    start = time.perf_counter()
    n = _num_vars(req.bqm)
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{n} variables exceeds exhaustive limit {BRUTE_FORCE_LIMIT}")
    if n == 0:
        return SolveResult((), req.bqm.offset, 1, 0.0, "brute")
    m = _dense_matrix(req.bqm, n)
    best_energy = math.inf
    best_code = 0
    chunk = 1 << min(n, 16)
    total = 1 << n
    for base in range(0, total, chunk):
        codes = np.arange(base, min(base + chunk, total), dtype=np.int64)
        bits = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.float64)
        energies = ((bits @ m) * bits).sum(axis=1) + req.bqm.offset
        k = int(np.argmin(energies))
        if energies[k] < best_energy:
            best_energy = float(energies[k])
            best_code = base + k
    sample = tuple((best_code >> (n - 1 - j)) & 1 for j in range(n))
    wall = (time.perf_counter() - start) * 1000.0
    return SolveResult(sample, best_energy, total, wall, "brute")


def _adjacency(bqm: BinaryQuadraticModel, n: int) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), w in bqm.quadratic.items():
        adj[i].append((j, w))
        adj[j].append((i, w))
    return adj


def _fields(bqm, adj, x, n):
    """Local field f_i = h_i + sum_j J_ij x_j; flip delta is (1-2x_i)*f_i."""
    f = [bqm.linear.get(i, 0.0) for i in range(n)]
    for i in range(n):
        f[i] += sum(w for j, w in adj[i] if x[j])
    return f


def _better(energy, sample, best_energy, best_sample):
    if energy < best_energy - 1e-12:
        return True
    return abs(energy - best_energy) <= 1e-12 and tuple(sample) < tuple(best_sample)


def simulated_annealing_solve(req: SolveRequest, sweeps: int = SA_SWEEPS_PER_RESTART
                              ) -> SolveResult:
    """Geometric-schedule single-flip Metropolis with restarts."""
    start = time.perf_counter()
    n = _num_vars(req.bqm)
    if n == 0:
        return SolveResult((), req.bqm.offset, 1, 0.0, "sa")
    bqm = req.bqm
    adj = _adjacency(bqm, n)
    coeffs = list(bqm.linear.values()) + list(bqm.quadratic.values())
    t0 = max((abs(c) for c in coeffs), default=1.0) or 1.0
    tf = SA_FINAL_TEMP_FACTOR * t0
    steps = sweeps * n
    cooling = (tf / t0) ** (1.0 / max(1, steps - 1))

    restarts = max(1, int(req.budget_ms * FLIPS_PER_MS) // steps)
    rng = random.Random(req.seed)
    best_energy = math.inf
    best_sample: tuple[int, ...] = tuple([1] * n)
    evaluated = 0
    deadline = start + 0.9 * req.budget_ms / 1000.0
    for _ in range(restarts):
        x = [rng.randint(0, 1) for _ in range(n)]
        f = _fields(bqm, adj, x, n)
        energy = bqm.energy(x)
        if _better(energy, x, best_energy, best_sample):
            best_energy = energy
            best_sample = tuple(x)
        temp = t0
        for _ in range(steps):
            i = rng.randrange(n)
            delta = (1 - 2 * x[i]) * f[i]
            if delta <= 0.0 or rng.random() < math.exp(-delta / temp):
                change = 1 - 2 * x[i]
                x[i] ^= 1
                energy += delta
                for j, w in adj[i]:
                    f[j] += w * change
                if _better(energy, x, best_energy, best_sample):
                    best_energy = energy
                    best_sample = tuple(x)
            temp *= cooling
            evaluated += 1
        if time.perf_counter() > deadline:
            break
    wall = (time.perf_counter() - start) * 1000.0
    return SolveResult(best_sample, best_energy, evaluated, wall, "sa")


def _exact_subsolve(bqm: BinaryQuadraticModel, adj, x: list[int],
                    subset: list[int]) -> None:
    """Clamp everything outside subset and set subset to its exact optimum."""
    pos = {v: k for k, v in enumerate(subset)}
    sub = BinaryQuadraticModel()
    inset = set(subset)
    for v in subset:
        h = bqm.linear.get(v, 0.0)
        h += sum(w for j, w in adj[v] if j not in inset and x[j])
        sub.add_linear(pos[v], h)
    for (i, j), w in bqm.quadratic.items():
        if i in inset and j in inset:
            sub.add_quadratic(pos[i], pos[j], w)
    res = brute_force_solve(SolveRequest(sub, budget_ms=1e9))
    for v in subset:
        x[v] = res.sample[pos[v]]


def tabu_hybrid_solve(req: SolveRequest, tenure: int | None = None,
                      subproblem_size: int = SUBPROBLEM_SIZE,
                      enforce_deadline: bool = True) -> SolveResult:
    """Single-flip tabu search interleaved with exact sub-problem solves.

    Sub-problems take the variables with the largest flip-delta magnitudes,
    clamping the rest; on instances at or below the sub-problem size the first
    exact solve is already the global optimum.

    With enforce_deadline=False the budget is interpreted purely as a flip
    budget and the wall-clock guards are skipped, making the result a
    function of (instance, seed) alone regardless of machine load.
    """
    start = time.perf_counter()
    n = _num_vars(req.bqm)
    if n == 0:
        return SolveResult((), req.bqm.offset, 1, 0.0, "tabu")
    bqm = req.bqm
    adj = _adjacency(bqm, n)
    if tenure is None:
        tenure = max(4, n // 4)
    size = min(subproblem_size, n)

    total_flips = int(req.budget_ms * FLIPS_PER_MS)
    rounds = max(1, min(32, (total_flips // 2) // SUBSOLVE_COST_FLIPS))
    tabu_iters = max(n, (total_flips // 2) // (rounds * n))

    rng = random.Random(req.seed)
    x = [rng.randint(0, 1) for _ in range(n)]
    f = _fields(bqm, adj, x, n)
    energy = bqm.energy(x)
    best_energy = energy
    best_sample = tuple(x)
    evaluated = 1
    tabu_until = [0] * n
    it = 0
    deadline = start + 0.8 * req.budget_ms / 1000.0
    # exact sub-solves cost a few ms; skip them when the budget is nearly spent
    subsolve_cutoff = start + req.budget_ms / 1000.0 - 0.008
    if not enforce_deadline:
        deadline = subsolve_cutoff = math.inf

    def apply_flip(i: int) -> None:
        nonlocal energy
        change = 1 - 2 * x[i]
        energy += (1 - 2 * x[i]) * f[i]
        x[i] ^= 1
        for j, w in adj[i]:
            f[j] += w * change

    for round_no in range(rounds):
        # exact solve of the most energetic sub-problem, then local tabu search
        if round_no > 0 and time.perf_counter() > subsolve_cutoff:
            break
        subset = sorted(range(n), key=lambda i: (-abs((1 - 2 * x[i]) * f[i]), i))[:size]
        _exact_subsolve(bqm, adj, x, sorted(subset))
        f = _fields(bqm, adj, x, n)
        energy = bqm.energy(x)
        evaluated += 2 ** size
        if _better(energy, x, best_energy, best_sample):
            best_energy = energy
            best_sample = tuple(x)

        stuck = False
        for iter_no in range(tabu_iters):
            it += 1
            if iter_no % 16 == 0 and time.perf_counter() > deadline:
                break
            best_move, best_delta = -1, math.inf
            for i in range(n):
                delta = (1 - 2 * x[i]) * f[i]
                aspiration = energy + delta < best_energy - 1e-12
                if tabu_until[i] > it and not aspiration:
                    continue
                if delta < best_delta:
                    best_move, best_delta = i, delta
            evaluated += n
            if best_move < 0 or (tenure == 0 and best_delta >= 0.0):
                stuck = True
                break
            apply_flip(best_move)
            tabu_until[best_move] = it + tenure
            if _better(energy, x, best_energy, best_sample):
                best_energy = energy
                best_sample = tuple(x)
        if time.perf_counter() > deadline:
            break
        if stuck and round_no + 1 < rounds:
            x = [rng.randint(0, 1) for _ in range(n)]
            f = _fields(bqm, adj, x, n)
            energy = bqm.energy(x)
    wall = (time.perf_counter() - start) * 1000.0
    return SolveResult(best_sample, best_energy, evaluated, wall, "tabu")


# --- remote ----------------------------------------------------------------

@dataclass
class MockRemoteServer:
    """In-process stand-in for a hosted hybrid solver.

    Reports an artificial latency instead of sleeping, so timeout behavior is
    testable with a controlled clock.
    """

    latency_ms: float = 300.0
    failure_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self._rng = random.Random(self.seed)

    def handle(self, payload: dict) -> tuple[float, dict]:
        if self._rng.random() < self.failure_rate:
            return self.latency_ms, {"error": "injected backend failure"}
        bqm, _ = BinaryQuadraticModel.from_json(payload["bqm"])
        res = tabu_hybrid_solve(SolveRequest(
            bqm, budget_ms=payload.get("budget_ms", 100.0),
            seed=payload.get("seed", 0)))
        return self.latency_ms, {"sample": list(res.sample), "energy": res.energy,
                                 "solver": "mock-hss"}


class HttpTransport:
    """POST /solve transport for a remote solver endpoint."""

    def __init__(self, endpoint: str, timeout_ms: float):
        self.endpoint = endpoint.rstrip("/")
        self.timeout_ms = timeout_ms

    def __call__(self, payload: dict) -> tuple[float, dict]:
        import httpx

        start = time.perf_counter()
        try:
            resp = httpx.post(f"{self.endpoint}/solve", json=payload,
                              timeout=self.timeout_ms / 1000.0)
        except httpx.TimeoutException as exc:
            raise SolveTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise RemoteError(str(exc)) from exc
        elapsed = (time.perf_counter() - start) * 1000.0
        if resp.status_code != 200:
            raise RemoteError(f"remote returned {resp.status_code}")
        return elapsed, resp.json()


class RemoteSolverClient:
    """Serializes the model to the wire format and enforces the timeout."""

    def __init__(self, transport, timeout_ms: float = 1000.0):
        self.transport = transport
        self.timeout_ms = timeout_ms

    def solve(self, req: SolveRequest) -> SolveResult:
        start = time.perf_counter()
        payload = {"bqm": req.bqm.to_json(), "budget_ms": req.budget_ms,
                   "seed": req.seed}
        latency_ms, response = self.transport(payload)
        if latency_ms > self.timeout_ms:
            raise SolveTimeout(
                f"remote took {latency_ms:.0f} ms > timeout {self.timeout_ms:.0f} ms")
        if "error" in response:
            raise RemoteError(response["error"])
        wall = max((time.perf_counter() - start) * 1000.0, latency_ms)
        return SolveResult(tuple(response["sample"]), float(response["energy"]),
                           0, wall, response.get("solver", "remote"))


def remote_solve(client: RemoteSolverClient, req: SolveRequest) -> SolveResult:
    return client.solve(req)


def solve_with_fallback(solver, req: SolveRequest, varmap: VariableMap,
                        fallback: Assignment) -> Assignment:
    """Decoded solver result, or the fallback assignment on any failure.

    Never raises: errors, timeouts, and infeasible decodes all fall back.
    """
    try:
        result = solver(req)
        decoded = decode_solution(list(result.sample), varmap, req.bqm)
    except Exception:
        return replace(fallback, fallback_used=True)
    if not decoded.feasible:
        return replace(fallback, fallback_used=True)
    decoded.fallback_used = False
    return decoded


SOLVERS = {
    "brute": brute_force_solve,
    "sa": simulated_annealing_solve,
    "tabu": tabu_hybrid_solve,
}
