/** SVG fleet map: vehicles, routes, exclusion boxes, and a drag editor. */

import type { FleetSnapshot, LatLon } from "./types";

export const MAP_WIDTH = 1000;
export const MAP_HEIGHT = 600;
const SVG_NS = "http://www.w3.org/2000/svg";

export const LINE_COLORS: Record<string, string> = {
  red: "#d64545",
  blue: "#3b6fc9",
  black: "#2b2b2b",
};

export function lineColor(line: string): string {
  return LINE_COLORS[line] ?? "#888888";
}

export interface Projection {
  toXY(p: LatLon): { x: number; y: number };
  toLatLon(x: number, y: number): LatLon;
}

/** Fit all snapshot geometry into the fixed map canvas with 5% padding. */
export function fitProjection(snapshot: FleetSnapshot): Projection {
  const points: LatLon[] = [];
  for (const v of snapshot.vehicles) {
    if (v.live) points.push(v.live);
    if (v.route) points.push(...v.route.polyline);
  }
  for (const e of snapshot.exclusions) points.push(e.sw, e.ne);
  if (points.length === 0) points.push({ lat: 0, lon: 0 }, { lat: 1, lon: 1 });

  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const p of points) {
    minLat = Math.min(minLat, p.lat);
    maxLat = Math.max(maxLat, p.lat);
    minLon = Math.min(minLon, p.lon);
    maxLon = Math.max(maxLon, p.lon);
  }
  const padLat = Math.max((maxLat - minLat) * 0.05, 1e-6);
  const padLon = Math.max((maxLon - minLon) * 0.05, 1e-6);
  minLat -= padLat;
  maxLat += padLat;
  minLon -= padLon;
  maxLon += padLon;

  const sx = MAP_WIDTH / (maxLon - minLon);
  const sy = MAP_HEIGHT / (maxLat - minLat);
  return {
    toXY: (p) => ({
      x: (p.lon - minLon) * sx,
      y: MAP_HEIGHT - (p.lat - minLat) * sy, // north up
    }),
    toLatLon: (x, y) => ({
      lat: minLat + (MAP_HEIGHT - y) / sy,
      lon: minLon + x / sx,
    }),
  };
}

function el(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

export interface DraftBox {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface MapCallbacks {
  onVehicleClick(id: string): void;
  onExclusionClick(id: string): void;
}

/**
 * Render the snapshot into the SVG element. Pure DOM construction from the
 * received data; no client-side route computation.
 */
export function renderMap(
  svg: SVGSVGElement,
  snapshot: FleetSnapshot,
  projection: Projection,
  selected: string | null,
  draft: DraftBox | null,
  callbacks: MapCallbacks,
): void {
  svg.setAttribute("viewBox", `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`);
  while (svg.firstChild) svg.removeChild(svg.firstChild);

  svg.appendChild(
    el("rect", {
      class: "map-background",
      x: "0",
      y: "0",
      width: String(MAP_WIDTH),
      height: String(MAP_HEIGHT),
      fill: "#f4f2ec",
    }),
  );

  for (const box of snapshot.exclusions) {
    const a = projection.toXY(box.sw);
    const b = projection.toXY(box.ne);
    const rect = el("rect", {
      class: "exclusion",
      "data-id": box.id,
      x: String(Math.min(a.x, b.x)),
      y: String(Math.min(a.y, b.y)),
      width: String(Math.abs(b.x - a.x)),
      height: String(Math.abs(b.y - a.y)),
      fill: "rgba(200, 60, 60, 0.25)",
      stroke: "#a33",
    });
    rect.addEventListener("click", (ev) => {
      ev.stopPropagation();
      callbacks.onExclusionClick(box.id);
    });
    svg.appendChild(rect);
  }

  for (const vehicle of snapshot.vehicles) {
    if (!vehicle.route) continue;
    const d = vehicle.route.polyline
      .map((p, i) => {
        const { x, y } = projection.toXY(p);
        return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    svg.appendChild(
      el("path", {
        class: "route",
        "data-vehicle": vehicle.id,
        d,
        fill: "none",
        stroke: lineColor(vehicle.line),
        "stroke-width": vehicle.id === selected ? "4" : "2",
        "stroke-opacity": "0.7",
      }),
    );
  }

  for (const vehicle of snapshot.vehicles) {
    if (!vehicle.live) continue;
    const { x, y } = projection.toXY(vehicle.live);
    const marker = el("circle", {
      class: "vehicle",
      "data-id": vehicle.id,
      cx: String(x),
      cy: String(y),
      r: vehicle.id === selected ? "9" : "6",
      fill: lineColor(vehicle.line),
      stroke: vehicle.id === selected ? "#000" : "#fff",
      "stroke-width": "2",
    });
    marker.addEventListener("click", (ev) => {
      ev.stopPropagation();
      callbacks.onVehicleClick(vehicle.id);
    });
    svg.appendChild(marker);
    if (vehicle.projected) {
      const proj = projection.toXY(vehicle.projected);
      svg.appendChild(
        el("circle", {
          class: "projected",
          "data-id": vehicle.id,
          cx: String(proj.x),
          cy: String(proj.y),
          r: "3",
          fill: "none",
          stroke: lineColor(vehicle.line),
          "stroke-dasharray": "2 2",
        }),
      );
    }
  }

  if (draft) {
    svg.appendChild(
      el("rect", {
        class: "draft-exclusion",
        x: String(Math.min(draft.x0, draft.x1)),
        y: String(Math.min(draft.y0, draft.y1)),
        width: String(Math.abs(draft.x1 - draft.x0)),
        height: String(Math.abs(draft.y1 - draft.y0)),
        fill: "rgba(60, 60, 200, 0.15)",
        stroke: "#339",
        "stroke-dasharray": "4 3",
      }),
    );
  }
}

/** Client coords -> map canvas coords (tolerates jsdom's zero-size rects). */
export function toCanvas(
  svg: SVGSVGElement,
  clientX: number,
  clientY: number,
): { x: number; y: number } {
  const rect = svg.getBoundingClientRect();
  const width = rect.width || MAP_WIDTH;
  const height = rect.height || MAP_HEIGHT;
  return {
    x: ((clientX - rect.left) / width) * MAP_WIDTH,
    y: ((clientY - rect.top) / height) * MAP_HEIGHT,
  };
}
