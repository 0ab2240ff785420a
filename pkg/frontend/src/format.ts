// Display formatting only: every formatter takes an API field verbatim and
// renders it; no aggregation or statistics happen in the UI.

import type { FlowStats, SankeyLinkData, SankeyNodeData } from "./types.js";

export function formatMs(ms: number): string {
  return `${(ms / 1000).toFixed(2)} s`;
}

export function formatPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function formatCount(value: number): string {
  return String(value);
}

/** Shortened step name, mirroring the backend's flow label rule. */
export function shortenLabel(label: string): string {
  const cut = label.lastIndexOf("_");
  const element = cut < 0 ? label : label.slice(0, cut);
  const gesture = cut < 0 ? "" : label.slice(cut);
  return element.replace(/Button$/, "") + gesture;
}

export function nodeTooltip(
  node: SankeyNodeData,
  incoming: SankeyLinkData[],
  outgoing: SankeyLinkData[],
): string {
  return [
    node.label,
    `entities: ${formatCount(node.cardinality)}`,
    `incoming links: ${formatCount(incoming.length)}`,
    `outgoing links: ${formatCount(outgoing.length)}`,
  ].join("\n");
}

export function linkTooltip(link: SankeyLinkData, sourceLabel: string, targetLabel: string): string {
  return [
    `${sourceLabel} → ${targetLabel}`,
    `sequences: ${formatCount(link.weight)} (${formatPercent(link.relative)})`,
    `avg transition: ${formatMs(link.mean_ms)}`,
  ].join("\n");
}

export function statsTooltip(label: string, count: number, stats: FlowStats): string {
  return [
    label,
    `sequences: ${formatCount(count)}`,
    `min: ${formatMs(stats.min)}`,
    `max: ${formatMs(stats.max)}`,
    `mean: ${formatMs(stats.mean)}`,
    `median: ${formatMs(stats.median)}`,
    `IQR: ${formatMs(stats.q1)} – ${formatMs(stats.q3)}`,
  ].join("\n");
}
