/** Thin typed client over the fleet service HTTP API. */

import type {
  ExclusionEntry,
  FleetSnapshot,
  LatLon,
  OptimizeOutcome,
  TripInfo,
} from "./types";

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function request<T>(
  fetchFn: typeof fetch,
  method: string,
  url: string,
  body?: unknown,
): Promise<T> {
  const resp = await fetchFn(url, {
    method,
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const payload = await resp.json();
  if (!resp.ok || (payload && typeof payload === "object" && "error" in payload)) {
    const message =
      payload && typeof payload === "object" && "error" in payload
        ? String((payload as { error: unknown }).error)
        : `HTTP ${resp.status}`;
    throw new ServiceError(message, resp.status);
  }
  return payload as T;
}

/** All console traffic goes through this client; nothing else touches fetch. */
export class ServiceClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  getFleet(): Promise<FleetSnapshot> {
    return request(this.fetchFn, "GET", `${this.base}/fleet`);
  }

  startTrip(vehicleId: string, line?: string): Promise<TripInfo> {
    return request(this.fetchFn, "POST", `${this.base}/trips`, {
      vehicle_id: vehicleId,
      line: line ?? null,
    });
  }

  endTrip(tripId: string): Promise<TripInfo> {
    return request(this.fetchFn, "POST", `${this.base}/trips/${tripId}/end`);
  }

  optimize(): Promise<OptimizeOutcome> {
    return request(this.fetchFn, "POST", `${this.base}/optimize`);
  }

  addExclusion(sw: LatLon, ne: LatLon): Promise<ExclusionEntry> {
    return request(this.fetchFn, "POST", `${this.base}/exclusions`, { sw, ne });
  }

  removeExclusion(id: string): Promise<{ removed: string }> {
    return request(this.fetchFn, "DELETE", `${this.base}/exclusions/${id}`);
  }
}
