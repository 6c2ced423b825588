import { beforeEach, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api";
import { DispatchConsole } from "../src/console";
import { fitProjection } from "../src/map";
import type { LatLon } from "../src/types";
import { FakeFleetService } from "./fakeService";

/** Let promise chains kicked off by DOM event handlers settle. */
async function flush(): Promise<void> {
  for (let i = 0; i < 10; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function parsePath(d: string): Array<{ x: number; y: number }> {
  return d
    .split(" ")
    .filter((token) => token.length > 0)
    .map((token) => {
      const [x, y] = token.replace(/^[ML]/, "").split(",").map(Number);
      return { x, y };
    });
}

interface Harness {
  service: FakeFleetService;
  console: DispatchConsole;
  root: HTMLElement;
  setNow(ms: number): void;
}

function makeHarness(): Harness {
  const service = new FakeFleetService();
  const root = document.createElement("div");
  document.body.appendChild(root);
  let nowMs = 0;
  const dispatch = new DispatchConsole(
    root,
    new ServiceClient("", service.fetch),
    { now: () => nowMs },
  );
  return {
    service,
    console: dispatch,
    root,
    setNow: (ms) => {
      nowMs = ms;
    },
  };
}

function mouse(target: Element, type: string, clientX: number, clientY: number): void {
  target.dispatchEvent(new MouseEvent(type, { clientX, clientY, bubbles: true }));
}

describe("DispatchConsole", () => {
  let h: Harness;

  beforeEach(() => {
    document.body.innerHTML = "";
    h = makeHarness();
  });

  it("renders one marker per vehicle after the first poll", async () => {
    await h.console.refresh();
    expect(h.root.querySelectorAll("circle.vehicle")).toHaveLength(3);
    expect(h.root.querySelectorAll("#vehicle-list li")).toHaveLength(3);
  });

  it("shows the stale banner until data arrives and again after 10 s", async () => {
    const banner = h.root.querySelector("#stale-banner") as HTMLElement;
    h.console.render();
    expect(banner.hidden).toBe(false);

    h.setNow(1_000);
    await h.console.refresh();
    expect(banner.hidden).toBe(true);

    h.setNow(12_500); // 11.5 s since the last snapshot
    h.console.render();
    expect(banner.hidden).toBe(false);
  });

  it("starts and ends a trip from the vehicle panel", async () => {
    await h.console.refresh();
    const item = h.root.querySelector('#vehicle-list li[data-id="v1"]')!;
    (item.querySelector("select.line-select") as HTMLSelectElement).value = "blue";
    (item.querySelector("button.start-trip") as HTMLButtonElement).click();
    await flush();

    expect(h.service.vehicles[0].tripId).toBe("trip-1");
    const enRoute = h.root.querySelector('#vehicle-list li[data-id="v1"]')!;
    expect(enRoute.textContent).toContain("en-route");
    expect(enRoute.textContent).toContain("(blue)");

    (enRoute.querySelector("button.end-trip") as HTMLButtonElement).click();
    await flush();
    expect(h.service.vehicles[0].tripId).toBeNull();
    expect(
      h.root.querySelector('#vehicle-list li[data-id="v1"]')!.textContent,
    ).toContain("idle");
  });

  it("surfaces a busy-vehicle rejection in the error box", async () => {
    await h.console.refresh();
    await h.console.startTrip("v1");
    await h.console.startTrip("v1");
    const errorBox = h.root.querySelector("#error-box") as HTMLElement;
    expect(errorBox.hidden).toBe(false);
    expect(errorBox.textContent).toContain("already on an active trip");
  });

  it("surfaces an optimize rejection when no trips are active", async () => {
    await h.console.refresh();
    await h.console.triggerOptimize();
    const errorBox = h.root.querySelector("#error-box") as HTMLElement;
    expect(errorBox.hidden).toBe(false);
    expect(errorBox.textContent).toContain("no active trips");
    expect(h.root.querySelectorAll("#event-feed li")).toHaveLength(0);
  });

  it("records optimization outcomes in the event feed", async () => {
    await h.console.refresh();
    await h.console.startTrip("v1");
    await h.console.triggerOptimize();
    const entries = h.root.querySelectorAll("#event-feed li");
    expect(entries).toHaveLength(1);
    expect(entries[0].textContent).toContain("fake: 2 vars");
    expect(entries[0].textContent).toContain("1 changed");
  });

  it("rejects zero-area exclusion rectangles without calling the service", async () => {
    await h.console.refresh();
    const svg = h.root.querySelector("#map")!;
    const before = h.service.requests.length;
    mouse(svg, "mousedown", 200, 300);
    mouse(svg, "mouseup", 200, 300);
    await flush();
    const posted = h.service.requests
      .slice(before)
      .filter((r) => r.method === "POST" && r.path === "/exclusions");
    expect(posted).toHaveLength(0);
    const errorBox = h.root.querySelector("#error-box") as HTMLElement;
    expect(errorBox.textContent).toContain("zero-area");
  });

  it("posts a normalized box from a drag in any direction", async () => {
    await h.console.refresh();
    const svg = h.root.querySelector("#map")!;
    // drag north-east to south-west; sw/ne must still come out ordered
    mouse(svg, "mousedown", 400, 100);
    mouse(svg, "mousemove", 300, 200);
    mouse(svg, "mouseup", 250, 280);
    await flush();
    expect(h.service.exclusions).toHaveLength(1);
    const box = h.service.exclusions[0];
    expect(box.sw.lat).toBeLessThan(box.ne.lat);
    expect(box.sw.lon).toBeLessThan(box.ne.lon);
  });

  it("runs the dispatch round-trip: exclusion diverts the route, deletion reverts it", async () => {
    await h.console.refresh();

    // start a trip and get its initial corridor route
    await h.console.startTrip("v1", "red");
    await h.console.triggerOptimize();
    expect(h.service.routeOf("v1")).toBe("corridor");

    // draw an exclusion box over the active corridor
    const projection = fitProjection(h.console.state.snapshot!);
    const mid = projection.toXY({ lat: 45.0, lon: 10.05 });
    const svg = h.root.querySelector("#map")!;
    mouse(svg, "mousedown", mid.x - 30, mid.y - 15);
    mouse(svg, "mousemove", mid.x, mid.y);
    mouse(svg, "mouseup", mid.x + 30, mid.y + 15);
    await flush();
    expect(h.service.exclusions).toHaveLength(1);
    const box = h.service.exclusions[0];
    const inBox = (p: LatLon) =>
      box.sw.lat <= p.lat && p.lat <= box.ne.lat &&
      box.sw.lon <= p.lon && p.lon <= box.ne.lon;

    // optimize: within one refresh the rendered route must avoid the box
    await h.console.triggerOptimize();
    expect(h.service.routeOf("v1")).toBe("detour");
    const diverted = h.root.querySelector('path.route[data-vehicle="v1"]')!;
    const divertedProjection = fitProjection(h.console.state.snapshot!);
    const divertedPoints = parsePath(diverted.getAttribute("d")!).map((p) =>
      divertedProjection.toLatLon(p.x, p.y),
    );
    expect(divertedPoints.length).toBeGreaterThan(1);
    expect(divertedPoints.some(inBox)).toBe(false);

    // delete the box by clicking it, re-optimize, and observe the reversal
    const rect = h.root.querySelector('rect.exclusion[data-id="' + box.id + '"]')!;
    rect.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();
    expect(h.service.exclusions).toHaveLength(0);

    await h.console.triggerOptimize();
    expect(h.service.routeOf("v1")).toBe("corridor");
    const reverted = h.root.querySelector('path.route[data-vehicle="v1"]')!;
    const revertedProjection = fitProjection(h.console.state.snapshot!);
    const revertedPoints = parsePath(reverted.getAttribute("d")!).map((p) =>
      revertedProjection.toLatLon(p.x, p.y),
    );
    expect(revertedPoints.some(inBox)).toBe(true);
  });

  it("deletes an exclusion when its rectangle is clicked", async () => {
    await h.console.refresh();
    const svg = h.root.querySelector("#map")!;
    mouse(svg, "mousedown", 100, 100);
    mouse(svg, "mouseup", 300, 250);
    await flush();
    expect(h.service.exclusions).toHaveLength(1);
    const id = h.service.exclusions[0].id;

    const rect = h.root.querySelector('rect.exclusion[data-id="' + id + '"]')!;
    rect.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();
    expect(h.service.exclusions).toHaveLength(0);
    const deleted = h.service.requests.filter(
      (r) => r.method === "DELETE" && r.path === `/exclusions/${id}`,
    );
    expect(deleted).toHaveLength(1);
  });
});
