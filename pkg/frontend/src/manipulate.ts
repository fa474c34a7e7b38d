/** Manipulation jobs: submit, poll, and survive a page reload mid-run. */

import { ApiError, StudioClient } from "./api.js";
import type { AttributeMap, ManipulationPayload } from "./types.js";

export const JOB_STORAGE_KEY = "studio-ui.jobs";

/** The slice of localStorage this controller needs (injectable in tests). */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface JobRecord {
  job: string;
  /** Input image (base64 PNG) — the first pane of the result triptych. */
  image: string;
  seed: number;
  checkpoint: string;
}

export interface JobCallbacks {
  onStatus?: (record: JobRecord, status: string, stage?: string) => void;
  onDone?: (record: JobRecord, result: ManipulationPayload) => void;
  onFailed?: (record: JobRecord, stage: string | undefined, message: string) => void;
}

export class ManipulationController {
  private active = new Map<string, JobRecord>();

  constructor(
    private readonly client: StudioClient,
    private readonly storage: KeyValueStore,
    private readonly callbacks: JobCallbacks = {},
    private readonly pollMs = 750,
  ) {}

  get activeJobs(): JobRecord[] {
    return [...this.active.values()];
  }

  async submit(
    image: string,
    sessionId: string,
    attributes: AttributeMap,
    seed: number,
  ): Promise<JobRecord> {
    const ticket = await this.client.startManipulation({
      image,
      session: sessionId,
      attributes,
      seed,
      dump_stages: true,
    });
    const record: JobRecord = {
      job: ticket.job,
      image,
      seed: ticket.seed,
      checkpoint: ticket.checkpoint,
    };
    this.active.set(record.job, record);
    this.save();
    void this.poll(record);
    return record;
  }

  /** Pick up jobs persisted by an earlier page load; returns how many. */
  resume(): number {
    const raw = this.storage.getItem(JOB_STORAGE_KEY);
    if (!raw) return 0;
    let records: JobRecord[];
    try {
      records = JSON.parse(raw) as JobRecord[];
    } catch {
      this.storage.removeItem(JOB_STORAGE_KEY);
      return 0;
    }
    let resumed = 0;
    for (const record of records) {
      if (!record?.job || this.active.has(record.job)) continue;
      this.active.set(record.job, record);
      void this.poll(record);
      resumed++;
    }
    return resumed;
  }

  private async poll(record: JobRecord): Promise<void> {
    try {
      for (;;) {
        const status = await this.client.jobStatus(record.job);
        if (!this.active.has(record.job)) return;
        this.callbacks.onStatus?.(record, status.status, status.stage);
        if (status.status === "done") {
          this.finish(record.job);
          this.callbacks.onDone?.(record, status.result!);
          return;
        }
        if (status.status === "error") {
          this.finish(record.job);
          this.callbacks.onFailed?.(record, status.stage, status.error ?? "job failed");
          return;
        }
        await sleep(this.pollMs);
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        // The service no longer knows this job; forget it too.
        this.finish(record.job);
        this.callbacks.onFailed?.(record, undefined, `job ${record.job} is gone`);
      } else {
        // Network trouble: stop polling but keep the record so a reload
        // (or a retry) can resume it.
        this.callbacks.onFailed?.(
          record,
          undefined,
          error instanceof Error ? error.message : String(error),
        );
      }
    }
  }

  private finish(job: string): void {
    this.active.delete(job);
    this.save();
  }

  private save(): void {
    if (this.active.size === 0) {
      this.storage.removeItem(JOB_STORAGE_KEY);
    } else {
      this.storage.setItem(JOB_STORAGE_KEY, JSON.stringify(this.activeJobs));
    }
  }
}

/** Per-stage artifacts as downloadable links, bytes exactly as served. */
export function stageDownloads(result: ManipulationPayload): { name: string; href: string }[] {
  const panes: [string, string][] = [["hallucination", result.hallucination]];
  for (const [stage, image] of Object.entries(result.stages ?? {})) {
    panes.push([stage, image]);
  }
  panes.push(["final", result.final]);
  return panes.map(([name, image]) => ({
    name: `${name}.png`,
    href: `data:image/png;base64,${image}`,
  }));
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
