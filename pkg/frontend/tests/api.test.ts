import { describe, expect, it } from "vitest";

import plan from "./fixtures/composite-plan.json";
import pair from "./fixtures/composite-pair.json";
import { ServiceClient, ServiceError } from "../src/api.js";
import { defaultConfig } from "../src/types.js";

function fakeFetch(status: number, payload: unknown) {
  const calls: { url: string; body: unknown }[] = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, body: init?.body ? JSON.parse(init.body as string) : null });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("service client", () => {
  it("posts the pair with config and timeline request", async () => {
    const { impl, calls } = fakeFetch(200, plan);
    const client = new ServiceClient("", impl);
    const doc = await client.plan(pair.source, pair.target, defaultConfig());
    expect(doc.stages.length).toBe(4);
    expect(calls[0].url).toBe("/plan");
    const body = calls[0].body as Record<string, unknown>;
    expect(body.includeTimeline).toBe(true);
    expect(body.config).toMatchObject({ timing: "animation", stepMs: 500 });
  });

  it("raises ServiceError carrying the violation list on 400", async () => {
    const { impl } = fakeFetch(400, {
      error: "validation failed",
      violations: [
        { code: "SemanticViolation", message: "unknown column 'Profit2'", path: "source:chart.x" },
      ],
    });
    const client = new ServiceClient("", impl);
    await expect(
      client.plan(pair.source, pair.target, defaultConfig()),
    ).rejects.toThrowError(ServiceError);
  });
});
