import { describe, expect, it } from "vitest";

import { ApiClient, RenderQueue, type FetchLike } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("posts render requests and returns WAV bytes with the params URL", async () => {
    const calls: { url: string; body: unknown }[] = [];
    const fetchFn: FetchLike = async (url, init) => {
      calls.push({ url, body: JSON.parse(String(init?.body)) });
      return new Response(new Uint8Array([82, 73, 70, 70]), {
        status: 200,
        headers: {
          "content-type": "audio/wav",
          "x-params-url": "/api/render/params",
        },
      });
    };
    const client = new ApiClient("http://x", fetchFn);
    const outcome = await client.render({
      score: { frame_rate: 250, total_frames: 1, notes: [] },
      noise_seed: 5,
    });
    expect(outcome.ok).toBe(true);
    if (outcome.ok) {
      expect(new Uint8Array(outcome.wav)).toEqual(
        new Uint8Array([82, 73, 70, 70]));
      expect(outcome.paramsUrl).toBe("/api/render/params");
    }
    expect(calls[0].url).toBe("http://x/api/render");
    expect((calls[0].body as { noise_seed: number }).noise_seed).toBe(5);
  });

  it("surfaces server errors with status and message", async () => {
    const fetchFn: FetchLike = async () =>
      jsonResponse({ error: "notes[1]: overlap at frame 50" }, 422);
    const client = new ApiClient("", fetchFn);
    const outcome = await client.render({
      score: { frame_rate: 250, total_frames: 1, notes: [] },
      noise_seed: 0,
    });
    expect(outcome.ok).toBe(false);
    if (!outcome.ok) {
      expect(outcome.status).toBe(422);
      expect(outcome.error).toContain("overlap");
    }
  });

  it("health() is false when the service is down", async () => {
    const client = new ApiClient("", async () => {
      throw new Error("connection refused");
    });
    expect(await client.health()).toBe(false);
  });
});

describe("RenderQueue (latest wins)", () => {
  it("replaces a queued request with a newer one", async () => {
    const executed: number[] = [];
    let release: (() => void) | null = null;
    const queue = new RenderQueue<number, string>(async (n) => {
      executed.push(n);
      if (n === 1) {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      return `done-${n}`;
    });

    const first = queue.submit(1);
    const second = queue.submit(2); // queued
    const third = queue.submit(3); // replaces #2, which resolves null now
    release!();
    expect(await first).toBe("done-1");
    expect(await second).toBeNull(); // superseded
    expect(await third).toBe("done-3");
    expect(executed).toEqual([1, 3]);
  });

  it("runs sequential submissions one by one", async () => {
    const order: number[] = [];
    const queue = new RenderQueue<number, number>(async (n) => {
      order.push(n);
      return n;
    });
    expect(await queue.submit(1)).toBe(1);
    expect(await queue.submit(2)).toBe(2);
    expect(order).toEqual([1, 2]);
  });

  it("propagates run errors to the right caller", async () => {
    const queue = new RenderQueue<number, number>(async (n) => {
      if (n === 1) throw new Error("boom");
      return n;
    });
    await expect(queue.submit(1)).rejects.toThrow("boom");
    expect(await queue.submit(2)).toBe(2);
  });
});
