/**
 * Thin typed client for the render service, plus a latest-wins render
 * queue: one request in flight, newer submissions replace any queued one.
 */

import type { ParamsSummary, RenderRequestBody } from "./model.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiError {
  ok: false;
  status: number;
  error: string;
}

export interface RenderOk {
  ok: true;
  wav: ArrayBuffer;
  paramsUrl: string | null;
}

export type RenderOutcome = RenderOk | ApiError;

async function errorOf(resp: Response): Promise<ApiError> {
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") message = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  return { ok: false, status: resp.status, error: message };
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(this.base + "/api/health");
      return resp.ok;
    } catch {
      return false;
    }
  }

  async defaults(): Promise<unknown> {
    const resp = await this.fetchFn(this.base + "/api/defaults");
    return resp.json();
  }

  async render(body: RenderRequestBody): Promise<RenderOutcome> {
    const resp = await this.post("/api/render", body);
    if (!resp.ok) return errorOf(resp);
    return {
      ok: true,
      wav: await resp.arrayBuffer(),
      paramsUrl: resp.headers.get("x-params-url"),
    };
  }

  async renderParams(body: RenderRequestBody):
      Promise<ParamsSummary | ApiError> {
    const resp = await this.post("/api/render/params", body);
    if (!resp.ok) return errorOf(resp);
    return (await resp.json()) as ParamsSummary;
  }

  async extract(body: {
    score: unknown;
    params: unknown;
  }): Promise<{ expressions: Record<string, number>[] } | ApiError> {
    const resp = await this.post("/api/extract", body);
    if (!resp.ok) return errorOf(resp);
    return (await resp.json()) as { expressions: Record<string, number>[] };
  }
}

interface Pending<B, R> {
  body: B;
  resolve: (result: R | null) => void;
  reject: (err: unknown) => void;
}

/**
 * Single render in flight; a submission during a run replaces any queued
 * one (the replaced promise resolves null = superseded).
 */
export class RenderQueue<B, R> {
  private inFlight = false;
  private pending: Pending<B, R> | null = null;

  constructor(private readonly run: (body: B) => Promise<R>) {}

  submit(body: B): Promise<R | null> {
    return new Promise<R | null>((resolve, reject) => {
      if (this.inFlight) {
        if (this.pending) this.pending.resolve(null);
        this.pending = { body, resolve, reject };
        return;
      }
      this.execute(body, resolve, reject);
    });
  }

  private execute(body: B, resolve: (r: R | null) => void,
                  reject: (e: unknown) => void): void {
    this.inFlight = true;
    this.run(body).then(
      (result) => {
        resolve(result);
        this.finish();
      },
      (err) => {
        reject(err);
        this.finish();
      },
    );
  }

  private finish(): void {
    this.inFlight = false;
    const next = this.pending;
    this.pending = null;
    if (next) this.execute(next.body, next.resolve, next.reject);
  }
}
