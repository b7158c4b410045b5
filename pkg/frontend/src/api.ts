/** Typed client for the audit service. All numbers displayed anywhere in
 * the dashboard originate from these responses; the UI never computes a
 * JR value itself. */

import type {
  AuditDocument,
  GenerateDocument,
  HeatmapDocument,
  SessionDocument,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        detail = body.error ?? JSON.stringify(body.detail ?? body);
      } catch {
        // keep statusText
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(): Promise<SessionDocument> {
    return this.request<SessionDocument>("/session");
  }

  audit(slate?: string[]): Promise<AuditDocument> {
    return this.post<AuditDocument>("/audit", slate ? { slate } : {});
  }

  optimize(options: { solver?: string; grid?: string } = {}): Promise<AuditDocument> {
    return this.post<AuditDocument>("/optimize", options);
  }

  random(seed: number): Promise<AuditDocument> {
    return this.post<AuditDocument>("/random", { seed });
  }

  generate(options: { samples?: number; seed?: number } = {}): Promise<GenerateDocument> {
    return this.post<GenerateDocument>("/generate", options);
  }

  heatmap(slateIds: string[]): Promise<HeatmapDocument> {
    const slate = encodeURIComponent(slateIds.join(","));
    return this.request<HeatmapDocument>(`/heatmap?slate=${slate}`);
  }
}
