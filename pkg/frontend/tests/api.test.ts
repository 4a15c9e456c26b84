/** API client contract: urls, auth headers, bodies, error surfaces. */

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { MockService, openMarket } from "./mockService.js";

describe("request shaping", () => {
  it("sends bearer tokens and JSON bodies", async () => {
    const service = new MockService([
      { method: "POST", path: "/markets/m-000001/trades", reply: { ok: true } },
    ]);
    const api = new ApiClient("http://svc", "sekrit", service.fetch);
    await api.postTrade("m-000001", "LOWER", 250, "key-1");
    const req = service.lastRequest();
    expect(req.headers["Authorization"]).toBe("Bearer sekrit");
    expect(req.body).toEqual({ outcome: "LOWER", spend_cents: 250, idempotency_key: "key-1" });
  });

  it("encodes nearby query parameters", async () => {
    const service = new MockService([
      { method: "GET", path: "/assets/nearby", reply: { assets: [] } },
    ]);
    const api = new ApiClient("http://svc", null, service.fetch);
    await api.nearbyAssets(51.9, -8.47, 25);
    expect(service.lastRequest().path).toBe("/assets/nearby?lat=51.9&lon=-8.47&radius_km=25");
  });

  it("quote hits the documented query surface", async () => {
    const service = new MockService([
      { method: "GET", path: "/markets/m-1/quote", reply: {} },
    ]);
    const api = new ApiClient("http://svc", "t", service.fetch);
    await api.getQuote("m-1", "HIGHER", 513);
    expect(service.lastRequest().path).toBe("/markets/m-1/quote?outcome=HIGHER&spend_cents=513");
  });
});

describe("error surfaces", () => {
  it("throws ApiError with the verbatim body and status", async () => {
    const body = { error: "balance 1 cents < spend 500 cents", kind: "InsufficientBalanceError" };
    const service = new MockService([
      { method: "POST", path: "/markets/m-1/trades", status: 409, reply: body },
    ]);
    const api = new ApiClient("http://svc", "t", service.fetch);
    const err = await api.postTrade("m-1", "HIGHER", 500, "k").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.body).toEqual(body);
    expect(err.remainingCapCents).toBeUndefined();
  });

  it("exposes remaining cap on 409 cap conflicts", async () => {
    const service = new MockService([
      {
        method: "POST",
        path: "/markets/m-1/trades",
        status: 409,
        reply: { error: "cap", kind: "WagerCapExceededError", remaining_cap_cents: 42 },
      },
    ]);
    const api = new ApiClient("http://svc", "t", service.fetch);
    const err = await api.postTrade("m-1", "HIGHER", 500, "k").catch((e) => e);
    expect(err.remainingCapCents).toBe(42);
  });

  it("parses market payloads", async () => {
    const service = new MockService([
      { method: "GET", path: "/markets/m-000001", reply: openMarket() },
    ]);
    const api = new ApiClient("http://svc", null, service.fetch);
    const market = await api.getMarket("m-000001");
    expect(market.prices["HIGHER"]).toBe(0.5);
    expect(market.state).toBe("OPEN");
  });
});
