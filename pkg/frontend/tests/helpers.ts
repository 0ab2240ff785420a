import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient, type FetchLike } from "../src/api.js";
import type { AppWindow } from "../src/main.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

/** Serves the recorded backend payloads; throws on anything unexpected. */
export function fixtureFetch(log?: string[], screens?: Record<string, string>): FetchLike {
  const routes: [RegExp, string][] = [
    [/^\/tasks$/, "tasks.json"],
    [/^\/tasks\/start-navigation\/sankey/, "sankey.json"],
    [/^\/tasks\/start-navigation\/flows\?/, "flows.json"],
    [/^\/tasks\/start-navigation\/flows\/flow-4\/sequences$/, "flow_sequences_low.json"],
    [/^\/tasks\/start-navigation\/flows\/[^/]+\/sequences$/, "flow_sequences.json"],
    [/^\/sequences\/[^/]+\/timeline/, "timeline.json"],
  ];
  return async (url: string) => {
    log?.push(url);
    if (url === "/screens.json") {
      if (screens) {
        return { ok: true, status: 200, json: async () => screens };
      }
      return { ok: false, status: 404, json: async () => ({ error: "not found" }) };
    }
    for (const [pattern, name] of routes) {
      if (pattern.test(url)) {
        return {
          ok: true,
          status: 200,
          json: async () => fixture(name),
        };
      }
    }
    return { ok: false, status: 404, json: async () => ({ error: "not found" }) };
  };
}

export function fixtureClient(log?: string[], screens?: Record<string, string>): ApiClient {
  return new ApiClient("", fixtureFetch(log, screens));
}

export function fakeWindow(search = ""): AppWindow & { urls: string[] } {
  const urls: string[] = [];
  return {
    location: { search },
    history: {
      pushState(_data: unknown, _unused: string, url?: string) {
        if (url) urls.push(url);
      },
    },
    addEventListener() {},
    urls,
  };
}
