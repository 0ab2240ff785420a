import type {
  FlowSequencesData,
  FlowViewData,
  TasksData,
  TaskViewData,
  TimelineData,
} from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

/**
 * Thin read-only client over the analytics API. Responses are cached by URL:
 * parameter changes are pure re-queries and back-navigation re-renders from
 * the cache without refetching.
 */
export class ApiClient {
  private cache = new Map<string, unknown>();

  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  async get<T>(path: string): Promise<T> {
    const url = this.base + path;
    if (this.cache.has(url)) {
      return this.cache.get(url) as T;
    }
    const resp = await this.fetchFn(url);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed with status ${resp.status}`);
    }
    const body = (await resp.json()) as T;
    this.cache.set(url, body);
    return body;
  }

  tasks(): Promise<TasksData> {
    return this.get("/tasks");
  }

  sankey(task: string, pMin: number | null): Promise<TaskViewData> {
    const qs = pMin === null ? "" : `?p_min=${pMin}`;
    return this.get(`/tasks/${encodeURIComponent(task)}/sankey${qs}`);
  }

  flows(task: string, metric: string, pMin: number | null): Promise<FlowViewData> {
    const params = new URLSearchParams({ metric });
    if (pMin !== null) params.set("p_min", String(pMin));
    return this.get(`/tasks/${encodeURIComponent(task)}/flows?${params.toString()}`);
  }

  flowSequences(task: string, flowId: string): Promise<FlowSequencesData> {
    return this.get(
      `/tasks/${encodeURIComponent(task)}/flows/${encodeURIComponent(flowId)}/sequences`,
    );
  }

  timeline(
    sequenceId: string,
    padMs: number,
    region: string,
    longMs: number,
  ): Promise<TimelineData> {
    const params = new URLSearchParams({
      pad_ms: String(padMs),
      region,
      long_ms: String(longMs),
    });
    return this.get(
      `/sequences/${encodeURIComponent(sequenceId)}/timeline?${params.toString()}`,
    );
  }

  /** Optional ui-element -> screenshot mapping hosted next to the UI assets. */
  async screens(): Promise<Record<string, string> | null> {
    try {
      return await this.get<Record<string, string>>("/screens.json");
    } catch {
      return null;
    }
  }
}
