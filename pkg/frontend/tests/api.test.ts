import { describe, expect, it } from "vitest";
import { ApiClient, ServiceError, type FetchLike } from "../src/api.js";
import { fixtureClient, loadFixture } from "./fixtureClient.js";

function stub(status: number, body: unknown): FetchLike {
  return () =>
    Promise.resolve({
      ok: status >= 200 && status < 300,
      status,
      json: () => Promise.resolve(body),
    } as unknown as Response);
}

describe("api client", () => {
  it("returns recorded /health and /classes payloads verbatim", async () => {
    const client = fixtureClient();
    expect(await client.health()).toEqual(loadFixture("health").response);
    const classes = await client.classes();
    expect(classes).toEqual(loadFixture("classes").response);
    expect(classes.classes).toHaveLength(12);
  });

  it("returns recorded /predict payloads verbatim", async () => {
    const fixture = loadFixture("predict_draws");
    const client = fixtureClient();
    const body = fixture.request.body as Parameters<ApiClient["predict"]>[0];
    expect(await client.predict(body)).toEqual(fixture.response);
  });

  it("surfaces a 400 validation error with the server's body", async () => {
    const errorBody = { error: "invalid request", fields: { s: "must be in (0, 1]" } };
    const client = new ApiClient("", stub(400, errorBody));
    await expect(client.predict({ s: 2, times: [0] })).rejects.toMatchObject({
      status: 400,
      body: errorBody,
    });
  });

  it("surfaces the no-posterior 409 as a ServiceError", async () => {
    const client = new ApiClient("", stub(409, { detail: "no posterior loaded" }));
    const error = await client.predict({ s: 0.5, times: [0] }).catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ServiceError);
    expect((error as ServiceError).message).toContain("no posterior loaded");
  });
});
