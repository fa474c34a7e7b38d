/** Live preview requests: debounced, cached, cancelled when superseded. */

import { ApiError, StudioClient } from "./api.js";
import type { AttributeMap, HallucinationResult } from "./types.js";

export const PREVIEW_DEBOUNCE_MS = 300;
export const SWEEP_VALUES = [0, 0.25, 0.5, 0.75, 1];
const CACHE_LIMIT = 64;

export function previewKey(attributes: AttributeMap, layoutVersion: number | string, seed: number): string {
  const entries = Object.entries(attributes).sort(([a], [b]) => (a < b ? -1 : 1));
  return JSON.stringify([layoutVersion, seed, entries]);
}

export class PreviewController {
  private cache = new Map<string, HallucinationResult>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private abort: AbortController | null = null;
  private sequence = 0;
  private inFlightKey: string | null = null;

  constructor(
    private readonly client: StudioClient,
    private readonly sessionId: string,
    private readonly onPreview: (result: HallucinationResult) => void,
    private readonly onOffline: (offline: boolean) => void = () => {},
    private readonly onError: (message: string) => void = () => {},
  ) {}

  /** Ask for a preview of the current state; bursts settle after 300ms. */
  request(attributes: AttributeMap, layoutVersion: number | string, seed: number): void {
    const key = previewKey(attributes, layoutVersion, seed);
    const hit = this.cache.get(key);
    if (hit) {
      // Already rendered this exact state: show it and drop stale work.
      this.cancelPending();
      this.onPreview(hit);
      return;
    }
    if (key === this.inFlightKey) return;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(key, attributes, seed);
    }, PREVIEW_DEBOUNCE_MS);
  }

  /** Five renders along one attribute, everything else held fixed. */
  async sweep(
    attributes: AttributeMap,
    layoutVersion: number | string,
    attribute: string,
    seed: number,
  ): Promise<{ values: number[]; frames: HallucinationResult[] }> {
    if (!(attribute in attributes)) throw new Error(`unknown attribute ${attribute}`);
    const frames = await Promise.all(
      SWEEP_VALUES.map((value) => {
        const swept = { ...attributes, [attribute]: value };
        return this.client
          .hallucinate({ session: this.sessionId, attributes: swept, seed })
          .then((result) => {
            this.remember(previewKey(swept, layoutVersion, seed), result);
            return result;
          });
      }),
    );
    return { values: SWEEP_VALUES.slice(), frames };
  }

  private cancelPending(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.abort?.abort();
    this.abort = null;
    this.inFlightKey = null;
    this.sequence++;
  }

  private async fire(key: string, attributes: AttributeMap, seed: number): Promise<void> {
    this.abort?.abort();
    const controller = new AbortController();
    this.abort = controller;
    const ticket = ++this.sequence;
    this.inFlightKey = key;
    try {
      const result = await this.client.hallucinate(
        { session: this.sessionId, attributes, seed },
        controller.signal,
      );
      if (ticket !== this.sequence) return; // a newer request took over
      this.remember(key, result);
      this.onOffline(false);
      this.onPreview(result);
    } catch (error) {
      if (ticket !== this.sequence) return;
      if (error instanceof ApiError) {
        this.onError(error.detail);
      } else {
        // fetch itself failed — the service is unreachable, not unhappy
        this.onOffline(true);
      }
    } finally {
      if (ticket === this.sequence) this.inFlightKey = null;
    }
  }

  private remember(key: string, result: HallucinationResult): void {
    this.cache.set(key, result);
    if (this.cache.size > CACHE_LIMIT) {
      const oldest = this.cache.keys().next().value;
      if (oldest !== undefined) this.cache.delete(oldest);
    }
  }
}
