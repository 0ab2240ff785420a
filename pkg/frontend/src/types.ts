// API contract types, mirroring the backend JSON payloads verbatim.

export interface SankeyNodeData {
  id: string;
  label: string;
  step: number;
  cardinality: number;
  color_key: string;
}

export interface SankeyLinkData {
  source: string;
  target: string;
  weight: number;
  relative: number;
  mean_ms: number;
  normalized: number;
}

export interface SankeyTotals {
  task_id: string;
  sequences_total: number;
  sequences_displayed: number;
  flows_total: number;
  flows_displayed: number;
  p_min: number;
  below_threshold: boolean;
}

export interface TaskViewData {
  nodes: SankeyNodeData[];
  links: SankeyLinkData[];
  totals: SankeyTotals;
}

export interface FlowStats {
  min: number;
  max: number;
  mean: number;
  median: number;
  q1: number;
  q3: number;
}

export interface FlowEntry {
  flow_id: string;
  label: string;
  count: number;
  stats: FlowStats;
  density: [number, number][];
  low_sample: boolean;
}

export interface FlowViewData {
  flows: FlowEntry[];
  target_ms?: number;
}

export interface TimelineInteraction {
  ts: number;
  label: string;
}

export interface TimelineGlanceData {
  start: number;
  end: number;
  duration: number;
  class: "short" | "long";
}

export interface TimelineMetricsData {
  glance_count: number;
  long_glance_count: number;
  total_glance_ms: number;
  interaction_count: number;
  mean_speed?: number;
  speed_delta?: number;
  max_abs_steering_delta?: number;
}

export interface TimelineData {
  window: [number, number];
  interactions: TimelineInteraction[];
  glances: TimelineGlanceData[];
  speed: [number, number][];
  steering: [number, number][];
  metrics: TimelineMetricsData;
  flags: { glances: boolean; driving: boolean };
}

export interface TaskEntry {
  task_id: string;
  name: string;
  sequence_count: number;
  flow_count: number;
  p_min_default: number;
}

export interface TasksData {
  tasks: TaskEntry[];
}

export interface FlowSequenceEntry {
  sequence_id: string;
  session_id: string;
  time_on_task_ms: number;
}

export interface FlowSequencesData {
  flow_id: string;
  sequences: FlowSequenceEntry[];
}
