// Sequence level view: interaction dots and display glances share an
// "attention" lane above speed and steering lanes, all on one zoomable time
// axis. Channels the vehicle never recorded render as flagged empty lanes.

import { formatCount, formatMs } from "./format.js";
import type { TimelineData } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 960;
const LANE_HEIGHT = 90;
const LANE_GAP = 16;
const MARGIN_X = 56;

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export type Domain = [number, number];

export function timeScale(domain: Domain, width = WIDTH): (ts: number) => number {
  const span = domain[1] > domain[0] ? domain[1] - domain[0] : 1;
  return (ts: number) => MARGIN_X + ((ts - domain[0]) / span) * (width - 2 * MARGIN_X);
}

/** Zoom the domain by `factor` (<1 zooms in) around `focus` (0..1 across). */
export function zoomDomain(domain: Domain, focus: number, factor: number, limit: Domain): Domain {
  const span = domain[1] - domain[0];
  const newSpan = Math.max(50, Math.min(limit[1] - limit[0], span * factor));
  const anchor = domain[0] + span * focus;
  let lo = anchor - newSpan * focus;
  let hi = lo + newSpan;
  if (lo < limit[0]) {
    lo = limit[0];
    hi = lo + newSpan;
  }
  if (hi > limit[1]) {
    hi = limit[1];
    lo = hi - newSpan;
  }
  return [Math.round(lo), Math.round(hi)];
}

export function panDomain(domain: Domain, deltaFraction: number, limit: Domain): Domain {
  const span = domain[1] - domain[0];
  let shift = span * deltaFraction;
  shift = Math.max(limit[0] - domain[0], Math.min(limit[1] - domain[1], shift));
  return [Math.round(domain[0] + shift), Math.round(domain[1] + shift)];
}

function laneGroup(index: number, label: string, empty: boolean): SVGGElement {
  const group = svgElement("g", {
    class: `lane${empty ? " lane-empty" : ""}`,
    transform: `translate(0, ${index * (LANE_HEIGHT + LANE_GAP)})`,
    "data-lane": label,
  });
  const caption = svgElement("text", {
    x: "4",
    y: String(LANE_HEIGHT / 2),
    class: "lane-caption",
  });
  caption.textContent = empty ? `${label} (no data)` : label;
  group.appendChild(caption);
  return group;
}

function polyline(
  series: [number, number][],
  x: (ts: number) => number,
  yScale: (v: number) => number,
  domain: Domain,
  className: string,
): SVGPolylineElement {
  const points = series
    .filter(([ts]) => ts >= domain[0] && ts <= domain[1])
    .map(([ts, v]) => `${x(ts)},${yScale(v)}`)
    .join(" ");
  return svgElement("polyline", { points, class: className, fill: "none" });
}

function valueScale(values: number[], height: number): (v: number) => number {
  if (values.length === 0) return () => height / 2;
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values);
  const span = hi > lo ? hi - lo : 1;
  return (v: number) => height - 12 - ((v - lo) / span) * (height - 24);
}

export function renderSequenceView(
  container: HTMLElement,
  data: TimelineData,
  initialDomain?: Domain,
): void {
  container.textContent = "";

  const metricsPanel = document.createElement("div");
  metricsPanel.className = "timeline-metrics";
  const m = data.metrics;
  const parts = [
    `interactions: ${formatCount(m.interaction_count)}`,
    `glances: ${formatCount(m.glance_count)} (${formatCount(m.long_glance_count)} long)`,
    `glance time: ${formatMs(m.total_glance_ms)}`,
  ];
  if (m.mean_speed !== undefined) {
    parts.push(`mean speed: ${m.mean_speed} km/h`, `speed delta: ${m.speed_delta} km/h`);
  }
  if (m.max_abs_steering_delta !== undefined) {
    parts.push(`max steering delta: ${m.max_abs_steering_delta}°`);
  }
  metricsPanel.textContent = parts.join("  ·  ");
  container.appendChild(metricsPanel);

  const domain: Domain = initialDomain ?? [data.window[0], data.window[1]];
  const svg = drawLanes(data, domain);
  container.appendChild(svg);

  // wheel zooms around the pointer, drag pans; lanes share the axis so they
  // always stay aligned
  let current = domain;
  const redraw = (next: Domain) => {
    current = next;
    const replacement = drawLanes(data, next);
    svg.setAttribute("data-domain", replacement.getAttribute("data-domain") ?? "");
    svg.replaceChildren(...replacement.childNodes);
  };
  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const rect = svg.getBoundingClientRect();
    const focus =
      rect.width > 0 ? (event.clientX - rect.left - MARGIN_X) / (rect.width - 2 * MARGIN_X) : 0.5;
    const factor = (event as WheelEvent).deltaY > 0 ? 1.25 : 0.8;
    redraw(zoomDomain(current, Math.min(1, Math.max(0, focus)), factor, data.window));
  });
  let dragStart: number | null = null;
  svg.addEventListener("mousedown", (event) => {
    dragStart = (event as MouseEvent).clientX;
  });
  svg.addEventListener("mouseup", (event) => {
    if (dragStart === null) return;
    const deltaPx = dragStart - (event as MouseEvent).clientX;
    dragStart = null;
    if (Math.abs(deltaPx) > 3) {
      redraw(panDomain(current, deltaPx / (WIDTH - 2 * MARGIN_X), data.window));
    }
  });
}

export function drawLanes(data: TimelineData, domain: Domain): SVGSVGElement {
  const lanes = 3;
  const height = lanes * (LANE_HEIGHT + LANE_GAP);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${height}`,
    class: "timeline",
    role: "img",
    "data-domain": `${domain[0]}:${domain[1]}`,
  });
  const x = timeScale(domain);

  const attention = laneGroup(0, "interactions + glances", false);
  for (const glance of data.glances) {
    if (glance.end < domain[0] || glance.start > domain[1]) continue;
    const x0 = x(Math.max(glance.start, domain[0]));
    const x1 = x(Math.min(glance.end, domain[1]));
    const bar = svgElement("rect", {
      x: String(x0),
      y: String(LANE_HEIGHT * 0.55),
      width: String(Math.max(1, x1 - x0)),
      height: "14",
      class: `glance ${glance.class}`,
      "data-duration": String(glance.duration),
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${glance.class} glance: ${formatMs(glance.duration)}`;
    bar.appendChild(title);
    attention.appendChild(bar);
  }
  for (const interaction of data.interactions) {
    if (interaction.ts < domain[0] || interaction.ts > domain[1]) continue;
    const dot = svgElement("circle", {
      cx: String(x(interaction.ts)),
      cy: String(LANE_HEIGHT * 0.3),
      r: "4",
      class: "interaction-dot",
      "data-ts": String(interaction.ts),
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${interaction.label} @ ${formatMs(interaction.ts)}`;
    dot.appendChild(title);
    attention.appendChild(dot);
  }
  if (!data.flags.glances) {
    attention.classList.add("lane-partial");
    const note = svgElement("text", {
      x: String(WIDTH / 2),
      y: String(LANE_HEIGHT * 0.62),
      class: "lane-note",
      "text-anchor": "middle",
    });
    note.textContent = "glance channel not recorded";
    attention.appendChild(note);
  }
  svg.appendChild(attention);

  const speedLane = laneGroup(1, "speed (km/h)", !data.flags.driving);
  if (data.flags.driving && data.speed.length > 0) {
    const yScale = valueScale(data.speed.map(([, v]) => v), LANE_HEIGHT);
    speedLane.appendChild(polyline(data.speed, x, yScale, domain, "speed-line"));
  }
  svg.appendChild(speedLane);

  const steeringLane = laneGroup(2, "steering angle (deg)", !data.flags.driving);
  if (data.flags.driving && data.steering.length > 0) {
    const yScale = valueScale(data.steering.map(([, v]) => v), LANE_HEIGHT);
    steeringLane.appendChild(polyline(data.steering, x, yScale, domain, "steering-line"));
  }
  svg.appendChild(steeringLane);

  return svg;
}
