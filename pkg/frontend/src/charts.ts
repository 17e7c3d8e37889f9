import {
  Bar,
  ScatterLayout,
  ScatterSeries,
  Viewport,
  barsLayout,
  dragToZoom,
  scatterLayout,
} from "./layout";
import type { SessionStore } from "./store";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

/** Hover pop-up shared by both charts; reports exactly what the API
 * returned for the hovered mark. */
export class Popup {
  readonly el: HTMLDivElement;

  constructor() {
    this.el = document.createElement("div");
    this.el.className = "popup";
    this.el.style.display = "none";
  }

  show(lines: string[], x: number, y: number): void {
    this.el.innerHTML = "";
    for (const line of lines) {
      const row = document.createElement("div");
      row.textContent = line;
      this.el.appendChild(row);
    }
    this.el.style.left = `${x + 12}px`;
    this.el.style.top = `${y + 12}px`;
    this.el.style.display = "block";
  }

  hide(): void {
    this.el.style.display = "none";
  }
}

function axes(svg: SVGSVGElement, layout: ScatterLayout, viewport: Viewport): void {
  for (const tick of layout.yTicks) {
    svg.appendChild(
      svgElement("line", {
        x1: viewport.padding,
        x2: viewport.width - viewport.padding,
        y1: tick.pos,
        y2: tick.pos,
        class: "gridline",
      }),
    );
    const label = svgElement("text", {
      x: viewport.padding - 6,
      y: tick.pos + 3,
      "text-anchor": "end",
      class: "tick",
    });
    label.textContent = tick.label;
    svg.appendChild(label);
  }
  for (const tick of layout.xTicks) {
    const label = svgElement("text", {
      x: tick.pos,
      y: viewport.height - viewport.padding + 14,
      "text-anchor": "middle",
      class: "tick",
    });
    label.textContent = tick.label;
    svg.appendChild(label);
  }
}

/** Scatter with one point per (topic, model), hover pop-ups and
 * rectangular drag-zoom (viewport rescale on this chart only). */
export function renderScatter(
  container: HTMLElement,
  store: SessionStore,
  popup: Popup,
  viewport: Viewport = { width: 760, height: 420, padding: 40 },
): void {
  container.innerHTML = "";
  const series: ScatterSeries[] = store.topicSeries();
  const layout = scatterLayout(series, viewport, store.state.zoom);

  const svg = svgElement("svg", {
    width: viewport.width,
    height: viewport.height,
    class: "scatter",
    role: "img",
  });
  axes(svg, layout, viewport);

  for (const point of layout.points) {
    const circle = svgElement("circle", {
      cx: point.x,
      cy: point.y,
      r: 4,
      fill: point.color,
      "data-topic": point.topic,
      "data-model": point.model,
      "data-value": point.value,
      class: "point",
    });
    circle.addEventListener("mouseenter", (event) => {
      const e = event as MouseEvent;
      popup.show(
        [
          `model: ${point.model}`,
          `${store.state.measure}: ${point.value.toFixed(4)}`,
          `topic: ${point.topic}`,
        ],
        e.pageX,
        e.pageY,
      );
    });
    circle.addEventListener("mouseleave", () => popup.hide());
    svg.appendChild(circle);
  }

  // drag-rectangle zoom
  let dragStart: { x: number; y: number } | null = null;
  let rubber: SVGRectElement | null = null;
  svg.addEventListener("mousedown", (event) => {
    const bounds = svg.getBoundingClientRect();
    dragStart = { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
    rubber = svgElement("rect", { class: "rubberband", x: dragStart.x, y: dragStart.y, width: 0, height: 0 });
    svg.appendChild(rubber);
  });
  svg.addEventListener("mousemove", (event) => {
    if (!dragStart || !rubber) return;
    const bounds = svg.getBoundingClientRect();
    const x = event.clientX - bounds.left;
    const y = event.clientY - bounds.top;
    rubber.setAttribute("x", String(Math.min(x, dragStart.x)));
    rubber.setAttribute("y", String(Math.min(y, dragStart.y)));
    rubber.setAttribute("width", String(Math.abs(x - dragStart.x)));
    rubber.setAttribute("height", String(Math.abs(y - dragStart.y)));
  });
  svg.addEventListener("mouseup", (event) => {
    if (!dragStart) return;
    const bounds = svg.getBoundingClientRect();
    const end = { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
    rubber?.remove();
    if (Math.abs(end.x - dragStart.x) > 8 && Math.abs(end.y - dragStart.y) > 8) {
      store.setZoom(
        dragToZoom(
          { x0: dragStart.x, y0: dragStart.y, x1: end.x, y1: end.y },
          viewport,
          store.state.zoom,
          layout.topics.length,
        ),
      );
    }
    dragStart = null;
    rubber = null;
  });

  container.appendChild(svg);

  if (store.state.zoom) {
    const reset = document.createElement("button");
    reset.textContent = "reset zoom";
    reset.className = "reset-zoom";
    reset.addEventListener("click", () => store.setZoom(null));
    container.appendChild(reset);
  }
  if (layout.points.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No evaluated runs yet - add a retrieval model.";
    container.appendChild(empty);
  }
}

/** Overall tab: one bar per model, sorted by mean, hover pop-up with the
 * inspected system's details. */
export function renderBars(
  container: HTMLElement,
  store: SessionStore,
  popup: Popup,
  viewport: Viewport = { width: 760, height: 420, padding: 40 },
): void {
  container.innerHTML = "";
  const means = store.overallMeans();
  const bars: Bar[] = barsLayout(means, viewport);

  const svg = svgElement("svg", {
    width: viewport.width,
    height: viewport.height,
    class: "bars",
    role: "img",
  });
  for (const bar of bars) {
    const rect = svgElement("rect", {
      x: bar.x,
      y: bar.y,
      width: bar.width,
      height: bar.height,
      fill: bar.color,
      "data-model": bar.model,
      "data-value": bar.value,
      class: "bar",
    });
    rect.addEventListener("mouseenter", (event) => {
      const e = event as MouseEvent;
      popup.show(
        [
          `model: ${bar.model}`,
          `measure: ${store.state.measure}`,
          `mean: ${bar.value.toFixed(4)}`,
        ],
        e.pageX,
        e.pageY,
      );
    });
    rect.addEventListener("mouseleave", () => popup.hide());
    svg.appendChild(rect);

    const label = svgElement("text", {
      x: bar.x + bar.width / 2,
      y: viewport.height - viewport.padding + 14,
      "text-anchor": "middle",
      class: "tick",
    });
    label.textContent = bar.model;
    svg.appendChild(label);
  }
  container.appendChild(svg);

  if (bars.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No evaluated runs yet - add a retrieval model.";
    container.appendChild(empty);
  }
}
