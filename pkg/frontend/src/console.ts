/** Dispatch console: wires the map, trip controls, exclusion editor, and the
 * optimization event feed to the fleet service. All state lives here; the
 * DOM is re-rendered from it after every poll or action. */

import { ServiceClient, ServiceError } from "./api";
import {
  DraftBox,
  fitProjection,
  renderMap,
  toCanvas,
} from "./map";
import type { FleetSnapshot, OptimizeOutcome } from "./types";

export const POLL_INTERVAL_MS = 2000;
export const STALE_AFTER_MS = 10_000;
const EVENT_FEED_LIMIT = 20;
export const LINES = ["red", "blue", "black"];

export interface ConsoleState {
  snapshot: FleetSnapshot | null;
  snapshotReceivedAt: number | null;
  selected: string | null;
  draft: DraftBox | null;
  events: OptimizeOutcome[];
  error: string | null;
}

export interface ConsoleOptions {
  now?: () => number;
}

export class DispatchConsole {
  readonly state: ConsoleState = {
    snapshot: null,
    snapshotReceivedAt: null,
    selected: null,
    draft: null,
    events: [],
    error: null,
  };

  private readonly now: () => number;
  private readonly svg: SVGSVGElement;
  private readonly banner: HTMLElement;
  private readonly errorBox: HTMLElement;
  private readonly panel: HTMLElement;
  private readonly feed: HTMLElement;
  private dragging = false;

  constructor(
    readonly root: HTMLElement,
    private readonly client: ServiceClient,
    options: ConsoleOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now());
    root.innerHTML = `
      <div id="stale-banner" hidden>Fleet data is stale — no snapshot for over 10 s</div>
      <div id="error-box" hidden></div>
      <div class="layout">
        <svg id="map" xmlns="http://www.w3.org/2000/svg"></svg>
        <aside>
          <section id="vehicle-panel"></section>
          <button id="optimize-button" type="button">Optimize now</button>
          <section id="event-feed"><h3>Optimizations</h3><ul></ul></section>
        </aside>
      </div>`;
    this.svg = root.querySelector("#map") as SVGSVGElement;
    this.banner = root.querySelector("#stale-banner") as HTMLElement;
    this.errorBox = root.querySelector("#error-box") as HTMLElement;
    this.panel = root.querySelector("#vehicle-panel") as HTMLElement;
    this.feed = root.querySelector("#event-feed ul") as HTMLElement;

    (root.querySelector("#optimize-button") as HTMLElement).addEventListener(
      "click",
      () => void this.triggerOptimize(),
    );
    this.svg.addEventListener("mousedown", (ev) => this.dragStart(ev));
    this.svg.addEventListener("mousemove", (ev) => this.dragMove(ev));
    this.svg.addEventListener("mouseup", (ev) => void this.dragEnd(ev));
  }

  /** Poll once; errors flip the stale banner rather than throwing. */
  async refresh(): Promise<void> {
    try {
      this.state.snapshot = await this.client.getFleet();
      this.state.snapshotReceivedAt = this.now();
    } catch (err) {
      this.setError(err);
    }
    this.render();
  }

  start(): () => void {
    void this.refresh();
    const timer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
    return () => clearInterval(timer);
  }

  async startTrip(vehicleId: string, line?: string): Promise<void> {
    await this.action(() => this.client.startTrip(vehicleId, line));
  }

  async endTrip(tripId: string): Promise<void> {
    await this.action(() => this.client.endTrip(tripId));
  }

  async triggerOptimize(): Promise<void> {
    try {
      const outcome = await this.client.optimize();
      this.state.events.unshift(outcome);
      this.state.events.length = Math.min(
        this.state.events.length,
        EVENT_FEED_LIMIT,
      );
      this.state.error = null;
    } catch (err) {
      this.setError(err);
    }
    await this.refresh();
  }

  async deleteExclusion(id: string): Promise<void> {
    await this.action(() => this.client.removeExclusion(id));
  }

  private async action(call: () => Promise<unknown>): Promise<void> {
    try {
      await call();
      this.state.error = null;
    } catch (err) {
      this.setError(err);
    }
    await this.refresh();
  }

  private setError(err: unknown): void {
    this.state.error =
      err instanceof ServiceError || err instanceof Error
        ? err.message
        : String(err);
  }

  // --- exclusion drag editor ------------------------------------------------

  private dragStart(ev: MouseEvent): void {
    if (!this.state.snapshot) return;
    const { x, y } = toCanvas(this.svg, ev.clientX, ev.clientY);
    this.state.draft = { x0: x, y0: y, x1: x, y1: y };
    this.dragging = true;
  }

  private dragMove(ev: MouseEvent): void {
    if (!this.dragging || !this.state.draft) return;
    const { x, y } = toCanvas(this.svg, ev.clientX, ev.clientY);
    this.state.draft.x1 = x;
    this.state.draft.y1 = y;
    this.render();
  }

  private async dragEnd(ev: MouseEvent): Promise<void> {
    if (!this.dragging || !this.state.draft || !this.state.snapshot) return;
    this.dragging = false;
    const { x, y } = toCanvas(this.svg, ev.clientX, ev.clientY);
    const draft = { ...this.state.draft, x1: x, y1: y };
    this.state.draft = null;
    if (draft.x0 === draft.x1 || draft.y0 === draft.y1) {
      // zero-area rectangles never reach the service
      this.state.error = "exclusion rejected: zero-area rectangle";
      this.render();
      return;
    }
    const projection = fitProjection(this.state.snapshot);
    const a = projection.toLatLon(draft.x0, draft.y0);
    const b = projection.toLatLon(draft.x1, draft.y1);
    const sw = { lat: Math.min(a.lat, b.lat), lon: Math.min(a.lon, b.lon) };
    const ne = { lat: Math.max(a.lat, b.lat), lon: Math.max(a.lon, b.lon) };
    await this.action(() => this.client.addExclusion(sw, ne));
  }

  // --- rendering ------------------------------------------------------------

  render(): void {
    const { snapshot, snapshotReceivedAt } = this.state;
    const stale =
      snapshotReceivedAt === null ||
      this.now() - snapshotReceivedAt > STALE_AFTER_MS;
    this.banner.hidden = !stale;

    this.errorBox.hidden = this.state.error === null;
    this.errorBox.textContent = this.state.error ?? "";

    if (snapshot) {
      renderMap(
        this.svg,
        snapshot,
        fitProjection(snapshot),
        this.state.selected,
        this.state.draft,
        {
          onVehicleClick: (id) => {
            this.state.selected = id;
            this.render();
          },
          onExclusionClick: (id) => void this.deleteExclusion(id),
        },
      );
    }
    this.renderPanel();
    this.renderFeed();
  }

  private renderPanel(): void {
    const snapshot = this.state.snapshot;
    this.panel.innerHTML = "";
    if (!snapshot) {
      this.panel.textContent = "Waiting for fleet data…";
      return;
    }
    const heading = document.createElement("h3");
    heading.textContent = "Vehicles";
    this.panel.appendChild(heading);
    const list = document.createElement("ul");
    list.id = "vehicle-list";
    for (const vehicle of snapshot.vehicles) {
      const item = document.createElement("li");
      item.dataset.id = vehicle.id;
      item.classList.toggle("selected", vehicle.id === this.state.selected);

      const label = document.createElement("span");
      label.textContent = `${vehicle.id} (${vehicle.line}) — ${vehicle.state}`;
      item.appendChild(label);

      if (vehicle.state === "idle") {
        const select = document.createElement("select");
        select.className = "line-select";
        for (const line of LINES) {
          const option = document.createElement("option");
          option.value = line;
          option.textContent = line;
          option.selected = line === vehicle.line;
          select.appendChild(option);
        }
        const start = document.createElement("button");
        start.type = "button";
        start.className = "start-trip";
        start.textContent = "Start trip";
        start.addEventListener("click", () =>
          void this.startTrip(vehicle.id, select.value),
        );
        item.appendChild(select);
        item.appendChild(start);
      } else if (vehicle.trip_id) {
        const end = document.createElement("button");
        end.type = "button";
        end.className = "end-trip";
        end.textContent = "End trip";
        const tripId = vehicle.trip_id;
        end.addEventListener("click", () => void this.endTrip(tripId));
        item.appendChild(end);
      }
      item.addEventListener("click", () => {
        this.state.selected = vehicle.id;
        this.render();
      });
      list.appendChild(item);
    }
    this.panel.appendChild(list);
  }

  private renderFeed(): void {
    this.feed.innerHTML = "";
    for (const outcome of this.state.events) {
      const changed = Object.values(outcome.vehicles).filter(
        (v) => v.changed,
      ).length;
      const item = document.createElement("li");
      item.textContent =
        `${outcome.solver}: ${outcome.problem_size} vars, ` +
        `${outcome.response_ms.toFixed(0)} ms, ${changed} changed` +
        (outcome.fallback_used ? " (fallback)" : "");
      this.feed.appendChild(item);
    }
  }
}
