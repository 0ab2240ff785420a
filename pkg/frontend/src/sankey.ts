// Step-aligned Sankey rendering. Node heights are proportional to event
// cardinality, ribbon widths to transition counts, ribbon colors to the
// normalized mean transition time. Geometry lives here; every number shown
// comes from the API payload untouched.

import { labelColor, timeColor } from "./color.js";
import { linkTooltip, nodeTooltip } from "./format.js";
import type { SankeyLinkData, SankeyNodeData, TaskViewData } from "./types.js";

export interface NodeBox {
  node: SankeyNodeData;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface LinkRibbon {
  link: SankeyLinkData;
  thickness: number;
  path: string;
  color: string;
}

export interface SankeyLayout {
  nodes: NodeBox[];
  links: LinkRibbon[];
  width: number;
  height: number;
}

const NODE_WIDTH = 14;
const NODE_GAP = 10;
const MARGIN = 24;

export function layoutSankey(
  data: TaskViewData,
  width = 960,
  height = 420,
): SankeyLayout {
  const steps = new Map<number, SankeyNodeData[]>();
  for (const node of data.nodes) {
    const column = steps.get(node.step) ?? [];
    column.push(node);
    steps.set(node.step, column);
  }
  const maxStep = Math.max(0, ...data.nodes.map((n) => n.step));
  const innerWidth = width - 2 * MARGIN - NODE_WIDTH;
  const columnX = (step: number) =>
    MARGIN + (maxStep === 0 ? 0 : (innerWidth * step) / maxStep);

  // one global scale keeps heights comparable across steps
  let scale = Number.POSITIVE_INFINITY;
  for (const column of steps.values()) {
    const total = column.reduce((sum, n) => sum + n.cardinality, 0);
    const usable = height - 2 * MARGIN - NODE_GAP * (column.length - 1);
    scale = Math.min(scale, usable / total);
  }
  if (!Number.isFinite(scale)) scale = 1;

  const boxes = new Map<string, NodeBox>();
  const nodes: NodeBox[] = [];
  for (const [step, column] of [...steps.entries()].sort((a, b) => a[0] - b[0])) {
    let y = MARGIN;
    for (const node of column) {
      const box = {
        node,
        x: columnX(step),
        y,
        width: NODE_WIDTH,
        height: Math.max(1, node.cardinality * scale),
      };
      nodes.push(box);
      boxes.set(node.id, box);
      y += box.height + NODE_GAP;
    }
  }

  // stack ribbons on both endpoints, ordered by the opposite node's position
  const nodeOrder = new Map(data.nodes.map((n, i) => [n.id, i]));
  const outOffset = new Map<string, number>();
  const inOffset = new Map<string, number>();
  const ordered = [...data.links].sort((a, b) => {
    const bySource = (nodeOrder.get(a.source) ?? 0) - (nodeOrder.get(b.source) ?? 0);
    if (bySource !== 0) return bySource;
    return (nodeOrder.get(a.target) ?? 0) - (nodeOrder.get(b.target) ?? 0);
  });
  const links: LinkRibbon[] = [];
  for (const link of ordered) {
    const source = boxes.get(link.source);
    const target = boxes.get(link.target);
    if (!source || !target) continue;
    const thickness = Math.max(1, link.weight * scale);
    const sy = source.y + (outOffset.get(link.source) ?? 0) + thickness / 2;
    const ty = target.y + (inOffset.get(link.target) ?? 0) + thickness / 2;
    outOffset.set(link.source, (outOffset.get(link.source) ?? 0) + thickness);
    inOffset.set(link.target, (inOffset.get(link.target) ?? 0) + thickness);
    const x0 = source.x + NODE_WIDTH;
    const x1 = target.x;
    const mid = (x0 + x1) / 2;
    links.push({
      link,
      thickness,
      path: `M ${x0} ${sy} C ${mid} ${sy}, ${mid} ${ty}, ${x1} ${ty}`,
      color: timeColor(link.normalized),
    });
  }
  return { nodes, links, width, height };
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

function withTitle(el: SVGElement, text: string): void {
  const title = document.createElementNS(SVG_NS, "title");
  title.textContent = text;
  el.appendChild(title);
}

export interface TaskViewHandlers {
  onLinkClick?: (link: SankeyLinkData) => void;
  onHover?: (text: string) => void;
  onNodeHover?: (node: SankeyNodeData) => void;
}

export function renderTaskView(
  container: HTMLElement,
  data: TaskViewData,
  handlers: TaskViewHandlers = {},
): void {
  container.textContent = "";
  const totals = data.totals;
  const heading = document.createElement("div");
  heading.className = "view-summary";
  heading.textContent =
    `${totals.sequences_displayed} of ${totals.sequences_total} sequences, ` +
    `${totals.flows_displayed} of ${totals.flows_total} flows (p_min ${totals.p_min})`;
  container.appendChild(heading);

  if (totals.below_threshold || data.nodes.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-view";
    empty.textContent = totals.below_threshold
      ? "All flows fall below the frequency threshold; lower p_min to see them."
      : "No sequences extracted for this task.";
    container.appendChild(empty);
    return;
  }

  const layout = layoutSankey(data);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    class: "sankey",
    role: "img",
  });

  const byId = new Map(data.nodes.map((n) => [n.id, n]));
  for (const ribbon of layout.links) {
    const path = svgElement("path", {
      d: ribbon.path,
      fill: "none",
      stroke: ribbon.color,
      "stroke-width": String(ribbon.thickness),
      "stroke-opacity": "0.55",
      class: "sankey-link",
      "data-source": ribbon.link.source,
      "data-target": ribbon.link.target,
      "data-weight": String(ribbon.link.weight),
    });
    const text = linkTooltip(
      ribbon.link,
      byId.get(ribbon.link.source)?.label ?? ribbon.link.source,
      byId.get(ribbon.link.target)?.label ?? ribbon.link.target,
    );
    withTitle(path, text);
    path.addEventListener("mouseenter", () => handlers.onHover?.(text));
    path.addEventListener("click", () => handlers.onLinkClick?.(ribbon.link));
    svg.appendChild(path);
  }

  for (const box of layout.nodes) {
    const group = svgElement("g", { class: "sankey-node", "data-node": box.node.id });
    const rect = svgElement("rect", {
      x: String(box.x),
      y: String(box.y),
      width: String(box.width),
      height: String(box.height),
      fill: labelColor(box.node.color_key),
      "data-cardinality": String(box.node.cardinality),
    });
    const incoming = data.links.filter((l) => l.target === box.node.id);
    const outgoing = data.links.filter((l) => l.source === box.node.id);
    const text = nodeTooltip(box.node, incoming, outgoing);
    withTitle(rect, text);
    rect.addEventListener("mouseenter", () => {
      handlers.onHover?.(text);
      handlers.onNodeHover?.(box.node);
    });
    group.appendChild(rect);
    const label = svgElement("text", {
      x: String(box.x + box.width + 4),
      y: String(box.y + box.height / 2),
      "dominant-baseline": "middle",
      class: "node-label",
    });
    label.textContent = box.node.label;
    group.appendChild(label);
    svg.appendChild(group);
  }
  container.appendChild(svg);
}
