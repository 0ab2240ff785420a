// Explorer shell: task selector, parameter controls, the three views, and
// the task -> flow -> sequence drill-down. All state is in the URL; the API
// client caches responses so back-navigation never refetches unchanged data.

import { ApiClient } from "./api.js";
import { shortenLabel } from "./format.js";
import { renderTaskView } from "./sankey.js";
import {
  decodeState,
  encodeState,
  normalizeState,
  type ViewName,
  type ViewState,
} from "./state.js";
import { renderSequenceView } from "./timeline.js";
import { renderFlowView, renderSequenceList } from "./violin.js";
import type { FlowSequencesData, FlowViewData, SankeyLinkData, TasksData } from "./types.js";

export interface AppWindow {
  location: { search: string };
  history: { pushState(data: unknown, unused: string, url?: string): void };
  addEventListener(type: string, listener: () => void): void;
}

export class ExplorerApp {
  state: ViewState;
  /** The in-flight render, so tests (and chained navigations) can await it. */
  pending: Promise<void> = Promise.resolve();
  private screens: Record<string, string> | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private win: AppWindow,
  ) {
    this.state = decodeState(win.location.search);
  }

  async start(): Promise<void> {
    const tasks = await this.api.tasks();
    this.screens = await this.api.screens();
    if (!this.state.task && tasks.tasks.length > 0) {
      this.state.task = tasks.tasks[0].task_id;
    }
    this.win.addEventListener("popstate", () => {
      this.state = decodeState(this.win.location.search);
      this.pending = this.render(tasks);
    });
    await this.render(tasks);
  }

  private navigate(update: Partial<ViewState>): void {
    this.state = normalizeState({ ...this.state, ...update });
    this.win.history.pushState(null, "", `?${encodeState(this.state)}`);
    this.pending = this.renderFresh();
  }

  private async renderFresh(): Promise<void> {
    const tasks = await this.api.tasks();
    await this.render(tasks);
  }

  async render(tasks: TasksData): Promise<void> {
    this.root.textContent = "";
    this.root.appendChild(this.header(tasks));
    const content = document.createElement("main");
    content.className = "content";
    this.root.appendChild(content);
    if (!this.state.task) {
      content.textContent = "No tasks available.";
      return;
    }
    try {
      if (this.state.view === "task") {
        await this.renderTask(content);
      } else if (this.state.view === "flow") {
        await this.renderFlow(content);
      } else {
        await this.renderSequence(content);
      }
    } catch (error) {
      const message = document.createElement("p");
      message.className = "error";
      message.textContent = String(error);
      content.appendChild(message);
    }
  }

  private header(tasks: TasksData): HTMLElement {
    const header = document.createElement("header");
    header.className = "toolbar";

    const taskSelect = document.createElement("select");
    taskSelect.id = "task-select";
    for (const task of tasks.tasks) {
      const option = document.createElement("option");
      option.value = task.task_id;
      option.textContent = `${task.name} (${task.sequence_count} sequences)`;
      option.selected = task.task_id === this.state.task;
      taskSelect.appendChild(option);
    }
    taskSelect.addEventListener("change", () =>
      this.navigate({ task: taskSelect.value, view: "task", flow: null, link: null, sequence: null }),
    );
    header.appendChild(taskSelect);

    const tabs = document.createElement("nav");
    tabs.className = "tabs";
    for (const view of ["task", "flow", "sequence"] as ViewName[]) {
      const tab = document.createElement("button");
      tab.textContent = `${view} level`;
      tab.className = view === this.state.view ? "tab active" : "tab";
      tab.dataset.view = view;
      tab.addEventListener("click", () => this.navigate({ view }));
      tabs.appendChild(tab);
    }
    header.appendChild(tabs);

    const pMin = document.createElement("input");
    pMin.type = "number";
    pMin.id = "p-min-input";
    pMin.min = "0";
    pMin.max = "1";
    pMin.step = "0.001";
    pMin.title = "minimum relative flow frequency (p_min)";
    if (this.state.pMin !== null) pMin.value = String(this.state.pMin);
    pMin.placeholder = "p_min (task default)";
    pMin.addEventListener("change", () =>
      this.navigate({ pMin: pMin.value === "" ? null : Number(pMin.value) }),
    );
    header.appendChild(pMin);

    if (this.state.view === "sequence") {
      header.appendChild(this.numberControl("pad-input", "window pad (ms)", this.state.padMs, (v) =>
        this.navigate({ padMs: v }),
      ));
      header.appendChild(
        this.numberControl("long-input", "long glance threshold (ms)", this.state.longMs, (v) =>
          this.navigate({ longMs: v }),
        ),
      );
    }

    const hover = document.createElement("div");
    hover.id = "hover-panel";
    hover.className = "hover-panel";
    header.appendChild(hover);
    if (this.screens) {
      const screen = document.createElement("div");
      screen.id = "screen-panel";
      screen.className = "screen-panel";
      header.appendChild(screen);
    }
    return header;
  }

  private numberControl(
    id: string,
    titleText: string,
    value: number,
    onChange: (value: number) => void,
  ): HTMLElement {
    const input = document.createElement("input");
    input.type = "number";
    input.id = id;
    input.title = titleText;
    input.value = String(value);
    input.addEventListener("change", () => {
      const parsed = Number(input.value);
      if (Number.isFinite(parsed) && parsed >= 0) onChange(parsed);
    });
    return input;
  }

  private setHover(text: string): void {
    const panel = this.root.querySelector("#hover-panel");
    if (panel) panel.textContent = text;
  }

  // Show the screen a UI element belongs to, when a screenshot mapping file
  // is hosted alongside the UI assets.
  private showScreen(label: string): void {
    const panel = this.root.querySelector("#screen-panel");
    if (!panel || !this.screens) return;
    const cut = label.lastIndexOf("_");
    const element = cut < 0 ? label : label.slice(0, cut);
    const src = this.screens[element];
    panel.textContent = "";
    if (src) {
      const img = document.createElement("img");
      img.src = src;
      img.alt = `screen for ${element}`;
      img.dataset.element = element;
      panel.appendChild(img);
    }
  }

  private async renderTask(content: HTMLElement): Promise<void> {
    const data = await this.api.sankey(this.state.task!, this.state.pMin);
    renderTaskView(content, data, {
      onHover: (text) => this.setHover(text),
      onNodeHover: (node) => this.showScreen(node.label),
      onLinkClick: (link) => this.selectLink(link),
    });
  }

  // Clicking a ribbon drills into the flow view with every flow containing
  // that transition highlighted; the link selection itself rides in the URL.
  private selectLink(link: SankeyLinkData): void {
    this.navigate({ view: "flow", link: `${link.source}->${link.target}`, flow: null });
  }

  static flowsContainingLink(data: FlowViewData, linkRef: string): Set<string> {
    const match = /^(\d+):(.+)->(\d+):(.+)$/.exec(linkRef);
    if (!match) return new Set();
    const [, stepRaw, sourceLabel, , targetLabel] = match;
    const step = Number(stepRaw);
    const source = shortenLabel(sourceLabel);
    const target = shortenLabel(targetLabel);
    const ids = new Set<string>();
    for (const flow of data.flows) {
      const parts = flow.label.split(" → ");
      if (parts[step] === source && parts[step + 1] === target) {
        ids.add(flow.flow_id);
      }
    }
    return ids;
  }

  private async renderFlow(content: HTMLElement): Promise<void> {
    const data = await this.api.flows(this.state.task!, this.state.metric, this.state.pMin);
    const highlight = this.state.link
      ? ExplorerApp.flowsContainingLink(data, this.state.link)
      : this.state.flow
        ? new Set([this.state.flow])
        : undefined;

    const dotSamples = new Map<string, FlowSequencesData>();
    if (this.state.metric === "time_on_task") {
      for (const flow of data.flows) {
        if (flow.low_sample || flow.density.length === 0) {
          dotSamples.set(flow.flow_id, await this.api.flowSequences(this.state.task!, flow.flow_id));
        }
      }
    }

    renderFlowView(
      content,
      data,
      {
        onHover: (text) => this.setHover(text),
        onFlowClick: (flowId) => this.navigate({ flow: flowId, link: null }),
      },
      { highlight, dotSamples },
    );

    if (this.state.flow) {
      const sequences = await this.api.flowSequences(this.state.task!, this.state.flow);
      renderSequenceList(content, sequences, (sequenceId) =>
        this.navigate({ view: "sequence", sequence: sequenceId }),
      );
    }
  }

  private async renderSequence(content: HTMLElement): Promise<void> {
    const data = await this.api.timeline(
      this.state.sequence!,
      this.state.padMs,
      this.state.region,
      this.state.longMs,
    );
    renderSequenceView(content, data);
  }
}

export async function boot(
  root?: HTMLElement,
  api: ApiClient = new ApiClient(),
  win: AppWindow = window,
): Promise<ExplorerApp> {
  const container = root ?? (document.getElementById("app") as HTMLElement);
  const app = new ExplorerApp(container, api, win);
  await app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
