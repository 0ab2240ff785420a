// Transition-time links use a colorblind-safe blue -> orange ramp instead of
// raw green/red, keeping the same ordering semantics (0 = fast, 1 = slow).

const SLOW_RGB: [number, number, number] = [214, 94, 13];
const FAST_RGB: [number, number, number] = [33, 102, 172];

export function timeColor(normalized: number): string {
  const t = Math.min(1, Math.max(0, normalized));
  const rgb = FAST_RGB.map((fast, i) => Math.round(fast + (SLOW_RGB[i] - fast) * t));
  return `rgb(${rgb[0]}, ${rgb[1]}, ${rgb[2]})`;
}

// Okabe-Ito categorical palette (colorblind safe) keyed by the backend's
// stable per-label color key, so equal events share a color across steps.
const CATEGORICAL = [
  "#e69f00",
  "#56b4e9",
  "#009e73",
  "#f0e442",
  "#0072b2",
  "#d55e00",
  "#cc79a7",
  "#999999",
];

export function labelColor(colorKey: string): string {
  const index = Number.parseInt(colorKey.slice(0, 6), 16) % CATEGORICAL.length;
  return CATEGORICAL[Number.isFinite(index) ? index : 0];
}
