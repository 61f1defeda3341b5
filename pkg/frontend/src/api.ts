// Thin client over the planning service; fetch is injectable for tests.

import type { DefaultsDoc, PlanDoc, TransitionConfig, Violation } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  violations: Violation[];

  constructor(violations: Violation[]) {
    super(violations.map((v) => v.message).join("; "));
    this.violations = violations;
  }
}

export class ServiceClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status === 400) {
      const payload = await response.json();
      throw new ServiceError(payload.violations ?? []);
    }
    if (!response.ok) {
      throw new Error(`service error ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async plan(
    source: unknown, target: unknown, config: TransitionConfig,
  ): Promise<PlanDoc> {
    return this.post<PlanDoc>("/plan", {
      source, target, config, includeTimeline: true,
    });
  }

  async defaults(): Promise<DefaultsDoc> {
    const response = await this.fetchImpl(this.baseUrl + "/defaults");
    if (!response.ok) throw new Error(`service error ${response.status}`);
    return (await response.json()) as DefaultsDoc;
  }

  async exportArchive(
    source: unknown, target: unknown, config: TransitionConfig,
    format: string, fps: number,
  ): Promise<Blob> {
    const response = await this.fetchImpl(this.baseUrl + "/export", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ source, target, config, format, fps }),
    });
    if (response.status === 400) {
      const payload = await response.json();
      throw new ServiceError(payload.violations ?? []);
    }
    if (!response.ok) throw new Error(`service error ${response.status}`);
    return await response.blob();
  }
}
