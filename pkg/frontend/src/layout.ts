import type { TopicPoint } from "./types";
import type { ZoomWindow } from "./store";

/** Pure chart geometry: data in, pixel coordinates and tooltip payloads
 * out. Rendering is a thin DOM layer over these. */

export interface Viewport {
  width: number;
  height: number;
  padding: number;
}

export interface ScatterSeries {
  key: string;
  color: string;
  points: TopicPoint[];
}

export interface ScatterPoint {
  x: number;
  y: number;
  model: string;
  topic: string;
  value: number;
  color: string;
}

export interface AxisTick {
  pos: number;
  label: string;
}

export interface ScatterLayout {
  points: ScatterPoint[];
  xTicks: AxisTick[];
  yTicks: AxisTick[];
  topics: string[];
}

function topicOrder(series: ScatterSeries[]): string[] {
  const seen = new Set<string>();
  const topics: string[] = [];
  for (const s of series) {
    for (const p of s.points) {
      if (!seen.has(p.topic)) {
        seen.add(p.topic);
        topics.push(p.topic);
      }
    }
  }
  return topics;
}

/** Topic index on x, measure value on y; an optional zoom window (in
 * topic-index / value coordinates) rescales the viewport. Points outside
 * the window are dropped. */
export function scatterLayout(
  series: ScatterSeries[],
  viewport: Viewport,
  zoom: ZoomWindow | null = null,
): ScatterLayout {
  const topics = topicOrder(series);
  const innerW = viewport.width - 2 * viewport.padding;
  const innerH = viewport.height - 2 * viewport.padding;
  const xDomain = zoom
    ? ([zoom.x0, zoom.x1] as const)
    : ([-0.5, Math.max(topics.length - 0.5, 0.5)] as const);
  const yDomain = zoom ? ([zoom.y0, zoom.y1] as const) : ([0, 1] as const);

  const xScale = (index: number) =>
    viewport.padding + ((index - xDomain[0]) / (xDomain[1] - xDomain[0])) * innerW;
  const yScale = (value: number) =>
    viewport.height -
    viewport.padding -
    ((value - yDomain[0]) / (yDomain[1] - yDomain[0])) * innerH;

  const points: ScatterPoint[] = [];
  for (const s of series) {
    for (const p of s.points) {
      const index = topics.indexOf(p.topic);
      if (index < xDomain[0] || index > xDomain[1]) continue;
      if (p.value < yDomain[0] || p.value > yDomain[1]) continue;
      points.push({
        x: xScale(index),
        y: yScale(p.value),
        model: s.key,
        topic: p.topic,
        value: p.value,
        color: s.color,
      });
    }
  }

  const xTickCount = Math.min(topics.length, 10);
  const xTicks: AxisTick[] = [];
  for (let i = 0; i < xTickCount; i++) {
    const index = Math.round((i * (topics.length - 1)) / Math.max(xTickCount - 1, 1));
    if (index < xDomain[0] || index > xDomain[1]) continue;
    xTicks.push({ pos: xScale(index), label: topics[index] ?? "" });
  }
  const yTicks: AxisTick[] = [];
  for (let i = 0; i <= 4; i++) {
    const value = yDomain[0] + (i / 4) * (yDomain[1] - yDomain[0]);
    yTicks.push({ pos: yScale(value), label: value.toFixed(2) });
  }
  return { points, xTicks, yTicks, topics };
}

/** Convert a pixel drag rectangle on the scatter into a zoom window in
 * data coordinates (topic index, measure value). */
export function dragToZoom(
  drag: { x0: number; y0: number; x1: number; y1: number },
  viewport: Viewport,
  current: ZoomWindow | null,
  topicCount: number,
): ZoomWindow {
  const innerW = viewport.width - 2 * viewport.padding;
  const innerH = viewport.height - 2 * viewport.padding;
  const xDomain = current
    ? [current.x0, current.x1]
    : [-0.5, Math.max(topicCount - 0.5, 0.5)];
  const yDomain = current ? [current.y0, current.y1] : [0, 1];
  const toDataX = (px: number) =>
    xDomain[0] + ((px - viewport.padding) / innerW) * (xDomain[1] - xDomain[0]);
  const toDataY = (py: number) =>
    yDomain[0] +
    ((viewport.height - viewport.padding - py) / innerH) * (yDomain[1] - yDomain[0]);
  const [pxLo, pxHi] = drag.x0 <= drag.x1 ? [drag.x0, drag.x1] : [drag.x1, drag.x0];
  const [pyLo, pyHi] = drag.y0 <= drag.y1 ? [drag.y0, drag.y1] : [drag.y1, drag.y0];
  return {
    x0: toDataX(pxLo),
    x1: toDataX(pxHi),
    y0: toDataY(pyHi), // pixel y grows downward
    y1: toDataY(pyLo),
  };
}

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number;
  model: string;
  value: number;
  color: string;
}

/** One bar per model, sorted by mean descending. */
export function barsLayout(
  means: { key: string; color: string; value: number }[],
  viewport: Viewport,
): Bar[] {
  const sorted = [...means].sort(
    (a, b) => b.value - a.value || (a.key < b.key ? -1 : 1),
  );
  const innerW = viewport.width - 2 * viewport.padding;
  const innerH = viewport.height - 2 * viewport.padding;
  const slot = innerW / Math.max(sorted.length, 1);
  const barWidth = slot * 0.6;
  return sorted.map((m, i) => {
    const height = m.value * innerH;
    return {
      x: viewport.padding + i * slot + (slot - barWidth) / 2,
      y: viewport.height - viewport.padding - height,
      width: barWidth,
      height,
      model: m.key,
      value: m.value,
      color: m.color,
    };
  });
}
