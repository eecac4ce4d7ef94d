// Shared test plumbing: recorded fixtures and a scripted fetch fake.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

export interface RecordedSet {
  name: string;
  overrides: {
    ratings: Record<string, string>;
    bands: Record<string, string>;
  };
  scenario: string;
  decisions_after: string;
  map_after: string;
  metrics_after: string;
  scenario_empty_after: string;
  revision_after: number;
}

export interface RecordedGlobals {
  project: string;
  matrix: string;
  decisions: string;
  map: string;
  metrics: string;
  map_one: string;
  map_none: string;
  matrix_empty: string;
  map_empty: string;
}

function load(name: string): string {
  return readFileSync(fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url)), "utf-8");
}

export function loadSets(): RecordedSet[] {
  return JSON.parse(load("sets.json")) as RecordedSet[];
}

export function loadGlobals(): RecordedGlobals {
  return JSON.parse(load("globals.json")) as RecordedGlobals;
}

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: string | null;
}

export type Route = (call: RecordedCall) => { status: number; body: string } | undefined;

// Fake fetch: walks the given routes and answers with the first match;
// every call is recorded for assertions on paths, bodies, and headers.
export function fakeFetch(routes: Route[]): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      headers: Object.fromEntries(
        Object.entries((init?.headers as Record<string, string>) ?? {}),
      ),
      body: typeof init?.body === "string" ? init.body : null,
    };
    calls.push(call);
    for (const route of routes) {
      const answer = route(call);
      if (answer) return new Response(answer.body, { status: answer.status });
    }
    return new Response(`no route for ${call.method} ${call.url}`, { status: 500 });
  };
  return { fetchFn, calls };
}

export function route(method: string, path: string, status: number, body: string): Route {
  return (call) => (call.method === method && call.url === path ? { status, body } : undefined);
}
