/** Wire types mirroring the fleet service JSON. */

export interface LatLon {
  lat: number;
  lon: number;
}

export interface VehicleEntry {
  id: string;
  line: string;
  trip_id: string | null;
  state: "en-route" | "idle";
  live?: LatLon & { ts: number };
  projected?: LatLon;
  route?: {
    node_path: string[];
    polyline: LatLon[];
    eta_s: number;
  };
}

export interface ExclusionEntry {
  id: string;
  sw: LatLon;
  ne: LatLon;
}

export interface FleetSnapshot {
  ts: number;
  vehicles: VehicleEntry[];
  exclusions: ExclusionEntry[];
  last_optimize_ts: number | null;
}

export interface VehicleOutcome {
  changed: boolean;
  eta_s: number;
  fallback: boolean;
  node_path: string[];
  polyline: LatLon[];
}

export interface OptimizeOutcome {
  ts: number;
  solver: string;
  problem_size: number;
  response_ms: number;
  fallback_used: boolean;
  degraded: string[];
  vehicles: Record<string, VehicleOutcome>;
}

export interface TripInfo {
  trip_id: string;
  vehicle_id: string;
  line: string;
  state: string;
}

export interface ServiceError {
  error: string;
}
