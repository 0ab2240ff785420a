// Flow level view: one violin per flow, in API order, over a shared value
// axis. Low-sample flows render as dot strips of their sequences' metric
// values instead of a density shape.

import { statsTooltip } from "./format.js";
import type { FlowEntry, FlowSequencesData, FlowViewData } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SLOT_WIDTH = 130;
const HEIGHT = 380;
const MARGIN = 30;

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export interface ValueScale {
  (value: number): number;
  domain: [number, number];
}

export function makeValueScale(lo: number, hi: number, height: number): ValueScale {
  const span = hi > lo ? hi - lo : 1;
  const scale = ((value: number) =>
    height - MARGIN - ((value - lo) / span) * (height - 2 * MARGIN)) as ValueScale;
  scale.domain = [lo, hi];
  return scale;
}

export interface FlowViewHandlers {
  onFlowClick?: (flowId: string) => void;
  onHover?: (text: string) => void;
}

export function renderFlowView(
  container: HTMLElement,
  data: FlowViewData,
  handlers: FlowViewHandlers = {},
  options: {
    highlight?: Set<string>;
    dotSamples?: Map<string, FlowSequencesData>;
  } = {},
): void {
  container.textContent = "";
  if (data.flows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-view";
    empty.textContent = "No flows above the frequency threshold.";
    container.appendChild(empty);
    return;
  }

  const lo = Math.min(...data.flows.map((f) => f.stats.min));
  const hi = Math.max(
    ...data.flows.map((f) => f.stats.max),
    data.target_ms ?? Number.NEGATIVE_INFINITY,
  );
  const y = makeValueScale(lo, hi, HEIGHT);
  const width = data.flows.length * SLOT_WIDTH + MARGIN;
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${HEIGHT}`,
    class: "violins",
    role: "img",
  });

  if (data.target_ms !== undefined) {
    svg.appendChild(
      svgElement("line", {
        x1: "0",
        x2: String(width),
        y1: String(y(data.target_ms)),
        y2: String(y(data.target_ms)),
        class: "target-line",
        "data-target-ms": String(data.target_ms),
      }),
    );
  }

  data.flows.forEach((flow, index) => {
    const cx = MARGIN + index * SLOT_WIDTH + SLOT_WIDTH / 2;
    const group = svgElement("g", {
      class:
        "violin" +
        (options.highlight?.has(flow.flow_id) ? " highlight" : "") +
        (flow.low_sample || flow.density.length === 0 ? " dot-strip" : ""),
      "data-flow": flow.flow_id,
    });
    const tooltip = statsTooltip(flow.label, flow.count, flow.stats);

    if (!flow.low_sample && flow.density.length > 0) {
      group.appendChild(violinShape(flow, cx, y));
    } else {
      renderDotStrip(group, flow, options.dotSamples?.get(flow.flow_id), cx, y);
    }

    // median and IQR marks shared by both renderings
    group.appendChild(
      svgElement("line", {
        x1: String(cx - 18),
        x2: String(cx + 18),
        y1: String(y(flow.stats.median)),
        y2: String(y(flow.stats.median)),
        class: "median-line",
      }),
    );
    group.appendChild(
      svgElement("line", {
        x1: String(cx),
        x2: String(cx),
        y1: String(y(flow.stats.q1)),
        y2: String(y(flow.stats.q3)),
        class: "iqr-line",
      }),
    );

    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = tooltip;
    group.appendChild(title);
    group.addEventListener("mouseenter", () => handlers.onHover?.(tooltip));
    group.addEventListener("click", () => handlers.onFlowClick?.(flow.flow_id));

    const caption = svgElement("text", {
      x: String(cx),
      y: String(HEIGHT - 8),
      "text-anchor": "middle",
      class: "violin-caption",
    });
    caption.textContent = `${flow.flow_id} (n=${flow.count})`;
    group.appendChild(caption);
    svg.appendChild(group);
  });
  container.appendChild(svg);
}

function violinShape(flow: FlowEntry, cx: number, y: ValueScale): SVGPathElement {
  const maxDensity = Math.max(...flow.density.map(([, d]) => d));
  const halfWidth = SLOT_WIDTH * 0.38;
  const right = flow.density.map(([value, density]) => {
    const w = maxDensity > 0 ? (density / maxDensity) * halfWidth : 0;
    return `${cx + w},${y(value)}`;
  });
  const left = [...flow.density].reverse().map(([value, density]) => {
    const w = maxDensity > 0 ? (density / maxDensity) * halfWidth : 0;
    return `${cx - w},${y(value)}`;
  });
  return svgElement("path", {
    d: `M ${right.join(" L ")} L ${left.join(" L ")} Z`,
    class: "violin-shape",
  });
}

function renderDotStrip(
  group: SVGGElement,
  flow: FlowEntry,
  samples: FlowSequencesData | undefined,
  cx: number,
  y: ValueScale,
): void {
  const values = samples
    ? samples.sequences.map((s) => s.time_on_task_ms)
    : [flow.stats.min, flow.stats.median, flow.stats.max];
  values.forEach((value, i) => {
    group.appendChild(
      svgElement("circle", {
        cx: String(cx + ((i % 3) - 1) * 5),
        cy: String(y(value)),
        r: "3",
        class: "strip-dot",
        "data-value": String(value),
      }),
    );
  });
}

export function renderSequenceList(
  container: HTMLElement,
  data: FlowSequencesData,
  onSequenceClick: (sequenceId: string) => void,
): void {
  const panel = document.createElement("div");
  panel.className = "sequence-list";
  const heading = document.createElement("h3");
  heading.textContent = `Sequences of ${data.flow_id}`;
  panel.appendChild(heading);
  const list = document.createElement("table");
  const header = document.createElement("tr");
  header.innerHTML = "<th>sequence</th><th>session</th><th>time on task (ms)</th>";
  list.appendChild(header);
  const rows = [...data.sequences].sort((a, b) => b.time_on_task_ms - a.time_on_task_ms);
  for (const seq of rows) {
    const row = document.createElement("tr");
    row.className = "sequence-row";
    row.dataset.sequence = seq.sequence_id;
    const idCell = document.createElement("td");
    idCell.textContent = seq.sequence_id;
    const sessionCell = document.createElement("td");
    sessionCell.textContent = seq.session_id;
    const totCell = document.createElement("td");
    totCell.textContent = String(seq.time_on_task_ms);
    row.append(idCell, sessionCell, totCell);
    row.addEventListener("click", () => onSequenceClick(seq.sequence_id));
    list.appendChild(row);
  }
  panel.appendChild(list);
  container.appendChild(panel);
}
