/** An ApiClient backed by the recorded service responses in fixtures/.
 *
 * GET requests are matched by URL; /predict requests by deep equality of
 * the JSON body against the recorded request body.
 */

import { readdirSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { ApiClient, type FetchLike } from "../src/api.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export interface Fixture {
  request: { method: string; url: string; body: unknown };
  response: Record<string, unknown>;
}

export function loadFixture(name: string): Fixture {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf-8")) as Fixture;
}

export function allFixtures(): Map<string, Fixture> {
  const out = new Map<string, Fixture>();
  for (const file of readdirSync(FIXTURE_DIR)) {
    if (file.endsWith(".json")) {
      out.set(file.replace(/\.json$/, ""), loadFixture(file.replace(/\.json$/, "")));
    }
  }
  return out;
}

function sameBody(a: unknown, b: unknown): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(body),
  } as unknown as Response;
}

export function fixtureFetch(): FetchLike {
  const fixtures = [...allFixtures().values()];
  return (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : null;
    for (const fixture of fixtures) {
      if (fixture.request.url !== url || fixture.request.method !== method) continue;
      if (method === "GET" || sameBody(normalize(body), normalize(fixture.request.body))) {
        return Promise.resolve(jsonResponse(200, fixture.response));
      }
    }
    return Promise.resolve(
      jsonResponse(400, { error: "no recorded fixture", fields: { url, body } }),
    );
  };
}

/** Recorded bodies omit defaulted fields; drop undefined keys and compare
 * the rest order-insensitively. */
function normalize(body: unknown): unknown {
  if (body === null || typeof body !== "object" || Array.isArray(body)) return body;
  const entries = Object.entries(body as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => a.localeCompare(b));
  return Object.fromEntries(entries);
}

export function fixtureClient(): ApiClient {
  return new ApiClient("", fixtureFetch());
}
