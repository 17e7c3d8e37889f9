import { describe, expect, it } from "vitest";

import { barsLayout, dragToZoom, scatterLayout } from "../src/layout";

const VIEWPORT = { width: 760, height: 420, padding: 40 };

const SERIES = [
  {
    key: "bm25",
    color: "#1f77b4",
    points: [
      { topic: "1", value: 0.2 },
      { topic: "2", value: 0.8 },
      { topic: "3", value: 0.5 },
    ],
  },
  {
    key: "tfidf",
    color: "#d62728",
    points: [
      { topic: "1", value: 0.4 },
      { topic: "2", value: 0.4 },
      { topic: "3", value: 0.9 },
    ],
  },
];

describe("scatterLayout", () => {
  it("emits one point per (topic, model)", () => {
    const layout = scatterLayout(SERIES, VIEWPORT);
    expect(layout.points).toHaveLength(6);
    expect(layout.topics).toEqual(["1", "2", "3"]);
  });

  it("keeps every displayed datum traceable to its payload", () => {
    const layout = scatterLayout(SERIES, VIEWPORT);
    const point = layout.points.find(
      (p) => p.model === "tfidf" && p.topic === "3",
    );
    expect(point).toBeDefined();
    expect(point!.value).toBe(0.9);
    expect(point!.color).toBe("#d62728");
  });

  it("maps higher values to smaller pixel y", () => {
    const layout = scatterLayout(SERIES, VIEWPORT);
    const low = layout.points.find((p) => p.value === 0.2)!;
    const high = layout.points.find((p) => p.value === 0.8)!;
    expect(high.y).toBeLessThan(low.y);
  });

  it("keeps points inside the padded viewport", () => {
    const layout = scatterLayout(SERIES, VIEWPORT);
    for (const p of layout.points) {
      expect(p.x).toBeGreaterThanOrEqual(VIEWPORT.padding);
      expect(p.x).toBeLessThanOrEqual(VIEWPORT.width - VIEWPORT.padding);
      expect(p.y).toBeGreaterThanOrEqual(VIEWPORT.padding);
      expect(p.y).toBeLessThanOrEqual(VIEWPORT.height - VIEWPORT.padding);
    }
  });

  it("zoom window drops outside points and rescales the rest", () => {
    const zoom = { x0: 0.5, x1: 2.5, y0: 0.3, y1: 1.0 };
    const layout = scatterLayout(SERIES, VIEWPORT, zoom);
    // topic "1" (index 0) is outside the x window; value 0.2 below the y window
    expect(layout.points.every((p) => p.topic !== "1")).toBe(true);
    expect(layout.points.every((p) => p.value >= 0.3)).toBe(true);
    // the remaining points span more of the viewport than before
    const unzoomed = scatterLayout(SERIES, VIEWPORT);
    const spanOf = (pts: { y: number }[]) =>
      Math.max(...pts.map((p) => p.y)) - Math.min(...pts.map((p) => p.y));
    const zoomedMatches = layout.points.filter((p) => p.value >= 0.4);
    const unzoomedMatches = unzoomed.points.filter((p) => p.value >= 0.4);
    expect(spanOf(zoomedMatches)).toBeGreaterThan(spanOf(unzoomedMatches) * 0.99);
  });
});

describe("dragToZoom", () => {
  it("converts a pixel rectangle into data coordinates", () => {
    const zoom = dragToZoom(
      { x0: VIEWPORT.padding, y0: VIEWPORT.padding,
        x1: VIEWPORT.width - VIEWPORT.padding, y1: VIEWPORT.height - VIEWPORT.padding },
      VIEWPORT,
      null,
      3,
    );
    // the full inner viewport maps back to the full domain
    expect(zoom.x0).toBeCloseTo(-0.5, 5);
    expect(zoom.x1).toBeCloseTo(2.5, 5);
    expect(zoom.y0).toBeCloseTo(0, 5);
    expect(zoom.y1).toBeCloseTo(1, 5);
  });

  it("normalizes inverted drags", () => {
    const a = dragToZoom({ x0: 100, y0: 100, x1: 300, y1: 300 }, VIEWPORT, null, 5);
    const b = dragToZoom({ x0: 300, y0: 300, x1: 100, y1: 100 }, VIEWPORT, null, 5);
    expect(a).toEqual(b);
    expect(a.x0).toBeLessThan(a.x1);
    expect(a.y0).toBeLessThan(a.y1);
  });
});

describe("barsLayout", () => {
  const MEANS = [
    { key: "bm25", color: "#1f77b4", value: 0.4 },
    { key: "tfidf", color: "#d62728", value: 0.7 },
    { key: "boolean", color: "#2ca02c", value: 0.2 },
  ];

  it("sorts bars by value descending", () => {
    const bars = barsLayout(MEANS, VIEWPORT);
    expect(bars.map((b) => b.model)).toEqual(["tfidf", "bm25", "boolean"]);
    expect(bars[0].x).toBeLessThan(bars[1].x);
  });

  it("bar height is proportional to the mean", () => {
    const bars = barsLayout(MEANS, VIEWPORT);
    const innerH = VIEWPORT.height - 2 * VIEWPORT.padding;
    const tfidf = bars.find((b) => b.model === "tfidf")!;
    expect(tfidf.height).toBeCloseTo(0.7 * innerH, 6);
    expect(tfidf.y + tfidf.height).toBeCloseTo(
      VIEWPORT.height - VIEWPORT.padding,
      6,
    );
  });

  it("carries the api value into the tooltip payload", () => {
    const bars = barsLayout(MEANS, VIEWPORT);
    expect(bars.find((b) => b.model === "boolean")!.value).toBe(0.2);
  });
});
