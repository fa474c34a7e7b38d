import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { StudioClient } from "../src/api.js";
import { PREVIEW_DEBOUNCE_MS, PreviewController, SWEEP_VALUES } from "../src/preview.js";
import type { AttributeMap, HallucinationResult } from "../src/types.js";
import { STUB_CHECKPOINT, StubService } from "./stub.js";

interface Harness {
  stub: StubService;
  preview: PreviewController;
  previews: HallucinationResult[];
  offlineStates: boolean[];
  errors: string[];
  attrs: (night: number) => AttributeMap;
}

async function setup(): Promise<Harness> {
  const stub = new StubService();
  const client = new StudioClient("", stub.fetch);
  const info = await client.createSession();
  const previews: HallucinationResult[] = [];
  const offlineStates: boolean[] = [];
  const errors: string[] = [];
  const preview = new PreviewController(
    client,
    info.id,
    (result) => previews.push(result),
    (offline) => offlineStates.push(offline),
    (message) => errors.push(message),
  );
  const attrs = (night: number): AttributeMap => ({ night, sunset: 0, clouds: 0.25 });
  return { stub, preview, previews, offlineStates, errors, attrs };
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("debouncing", () => {
  it("collapses a burst of requests into one", async () => {
    const { stub, preview, previews, attrs } = await setup();
    preview.request(attrs(0.1), 0, 7);
    await vi.advanceTimersByTimeAsync(100);
    preview.request(attrs(0.2), 0, 7);
    await vi.advanceTimersByTimeAsync(100);
    preview.request(attrs(0.3), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS - 1);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(1);
    expect(previews).toHaveLength(1);
  });

  it("waits the full settle time from the last change", async () => {
    const { stub, preview, attrs } = await setup();
    preview.request(attrs(0.5), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS - 50);
    preview.request(attrs(0.6), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS - 50);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(0);
    await vi.advanceTimersByTimeAsync(50);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(1);
  });
});

describe("caching", () => {
  it("replays an identical state without a server call", async () => {
    const { stub, preview, previews, attrs } = await setup();
    preview.request(attrs(0.4), 3, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(1);

    preview.request(attrs(0.4), 3, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS * 2);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(1); // cache hit
    expect(previews).toHaveLength(2);
    expect(previews[1]).toEqual(previews[0]);
  });

  it("treats attribute order as irrelevant to the cache key", async () => {
    const { stub, preview, attrs } = await setup();
    preview.request({ night: 0.4, clouds: 0.25, sunset: 0 }, 3, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    preview.request(attrs(0.4), 3, 7); // same values, different insertion order
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS * 2);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(1);
  });

  it("misses when layout version, seed, or values change", async () => {
    const { stub, preview, attrs } = await setup();
    preview.request(attrs(0.4), 3, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    preview.request(attrs(0.4), 4, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    preview.request(attrs(0.4), 4, 8);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(3);
  });
});

describe("latest wins", () => {
  it("cancels the in-flight preview when a newer state arrives", async () => {
    const { stub, preview, previews, attrs } = await setup();
    stub.latencyMs = 500;
    preview.request(attrs(0.1), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS + 10); // fires, in flight
    preview.request(attrs(0.9), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS + 600);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(2);
    expect(previews).toHaveLength(1); // only the newest made it to the screen
    const shown = JSON.parse(atob(previews[0]!.image)) as unknown[];
    expect(JSON.stringify(shown)).toContain("0.9");
  });

  it("ignores a cancelled request's failure", async () => {
    const { stub, preview, offlineStates, previews, attrs } = await setup();
    stub.latencyMs = 500;
    preview.request(attrs(0.1), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS + 10);
    preview.request(attrs(0.2), 0, 7); // aborts the first
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS + 600);
    expect(offlineStates).toEqual([false]); // abort never flagged the service down
    expect(previews).toHaveLength(1);
  });
});

describe("service health", () => {
  it("raises the offline banner when fetch itself fails, then clears it", async () => {
    const { stub, preview, offlineStates, previews, attrs } = await setup();
    stub.offline = true;
    preview.request(attrs(0.3), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(offlineStates).toEqual([true]);
    expect(previews).toHaveLength(0);

    stub.offline = false;
    preview.request(attrs(0.3), 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(offlineStates).toEqual([true, false]);
    expect(previews).toHaveLength(1);
  });

  it("reports server-side rejections as errors, not outages", async () => {
    const { preview, offlineStates, errors, attrs } = await setup();
    preview.request({ ...attrs(0.3), bogus: 1 }, 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(errors).toEqual(["unknown attribute bogus"]);
    expect(offlineStates).toEqual([]);
  });
});

describe("attribute sweep", () => {
  it("issues five requests at evenly spaced values", async () => {
    const { stub, preview, attrs } = await setup();
    const promise = preview.sweep(attrs(0.4), 0, "night", 7);
    await vi.advanceTimersByTimeAsync(0);
    const { values, frames } = await promise;
    expect(values).toEqual([0, 0.25, 0.5, 0.75, 1]);
    expect(values).toEqual(SWEEP_VALUES);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(5);
    expect(frames).toHaveLength(5);
    expect(new Set(frames.map((f) => f.image)).size).toBe(5); // all distinct
    expect(frames.every((f) => f.checkpoint === STUB_CHECKPOINT)).toBe(true);
  });

  it("seeds the preview cache so a later slider stop is free", async () => {
    const { stub, preview, attrs } = await setup();
    const promise = preview.sweep(attrs(0.4), 0, "night", 7);
    await vi.advanceTimersByTimeAsync(0);
    await promise;
    preview.request({ ...attrs(0.4), night: 0.5 }, 0, 7);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS * 2);
    expect(stub.callsTo("POST", "/hallucinate")).toBe(5); // no sixth call
  });

  it("rejects attributes the panel does not know", async () => {
    const { preview, attrs } = await setup();
    await expect(preview.sweep(attrs(0.4), 0, "sparkle", 7)).rejects.toThrow(/unknown attribute/);
  });
});
