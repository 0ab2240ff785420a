// All explorer state lives in the URL query string, so a browser refresh (or
// a shared link) restores the exact view, and back/forward walk the
// drill-down history.

export type ViewName = "task" | "flow" | "sequence";

export interface ViewState {
  task: string | null;
  view: ViewName;
  pMin: number | null; // null means "use the task definition's default"
  metric: string;
  padMs: number;
  longMs: number;
  region: string;
  flow: string | null;
  link: string | null; // "sourceNodeId->targetNodeId" selected in the task view
  sequence: string | null;
}

export const DEFAULT_METRIC = "time_on_task";
export const DEFAULT_PAD_MS = 2000;
export const DEFAULT_LONG_MS = 2000;
export const DEFAULT_REGION = "CENTER_DISPLAY";

export function defaultState(): ViewState {
  return {
    task: null,
    view: "task",
    pMin: null,
    metric: DEFAULT_METRIC,
    padMs: DEFAULT_PAD_MS,
    longMs: DEFAULT_LONG_MS,
    region: DEFAULT_REGION,
    flow: null,
    link: null,
    sequence: null,
  };
}

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.task) params.set("task", state.task);
  params.set("view", state.view);
  if (state.pMin !== null) params.set("p_min", String(state.pMin));
  if (state.metric !== DEFAULT_METRIC) params.set("metric", state.metric);
  if (state.padMs !== DEFAULT_PAD_MS) params.set("pad_ms", String(state.padMs));
  if (state.longMs !== DEFAULT_LONG_MS) params.set("long_ms", String(state.longMs));
  if (state.region !== DEFAULT_REGION) params.set("region", state.region);
  if (state.flow) params.set("flow", state.flow);
  if (state.link) params.set("link", state.link);
  if (state.sequence) params.set("sequence", state.sequence);
  return params.toString();
}

function intOr(raw: string | null, fallback: number): number {
  const value = raw === null ? NaN : Number.parseInt(raw, 10);
  return Number.isFinite(value) && value >= 0 ? value : fallback;
}

export function decodeState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultState();
  state.task = params.get("task");
  const view = params.get("view");
  if (view === "task" || view === "flow" || view === "sequence") state.view = view;
  const pMin = params.get("p_min");
  if (pMin !== null) {
    const value = Number.parseFloat(pMin);
    if (Number.isFinite(value) && value >= 0 && value <= 1) state.pMin = value;
  }
  state.metric = params.get("metric") ?? DEFAULT_METRIC;
  state.padMs = intOr(params.get("pad_ms"), DEFAULT_PAD_MS);
  state.longMs = intOr(params.get("long_ms"), DEFAULT_LONG_MS);
  state.region = params.get("region") ?? DEFAULT_REGION;
  state.flow = params.get("flow");
  state.link = params.get("link");
  state.sequence = params.get("sequence");
  return normalizeState(state);
}

// Keep the selection consistent with the active view: a sequence view without
// a sequence id falls back to the flow view, and a flow selection never
// outlives its task.
export function normalizeState(state: ViewState): ViewState {
  if (state.view === "sequence" && !state.sequence) {
    state.view = state.flow ? "flow" : "task";
  }
  if (state.view === "task") {
    state.sequence = null;
  }
  return state;
}
