/** In-memory stand-in for the studio service, served through a fake fetch. */

import type { FetchLike } from "../src/api.js";
import type { AttributeMap, ManipulationPayload } from "../src/types.js";

export const STUB_CHECKPOINT = "c0ffee".repeat(10) + "beef";
const ATTRIBUTES = ["night", "sunset", "clouds", "fog", "snow", "autumn", "lush", "dry"];
const NUM_CLASSES = 6;
const STAGES = ["stylize", "smooth_affinity", "screened_poisson"];

interface StubSession {
  id: string;
  version: number;
  labels: Int32Array;
  side: number;
  attributes: AttributeMap;
  undo: Int32Array[];
}

interface StubJob {
  id: string;
  pollsLeft: number;
  result: ManipulationPayload;
  failure: { stage: string; message: string } | null;
}

export class StubService {
  calls: { method: string; path: string }[] = [];
  sessions = new Map<string, StubSession>();
  jobs = new Map<string, StubJob>();
  resolution = 16;
  latencyMs = 0;
  pollsUntilDone = 2;
  offline = false;
  failNextEdit: string | null = null;
  failJobs: { stage: string; message: string } | null = null;
  private counter = 0;

  /** Pass to StudioClient as its fetch implementation. */
  fetch: FetchLike = (input, init) => this.handle(input, init);

  callsTo(method: string, suffix: string): number {
    return this.calls.filter((c) => c.method === method && c.path.endsWith(suffix)).length;
  }

  private async handle(path: string, init?: RequestInit): Promise<Response> {
    const method = (init?.method ?? "GET").toUpperCase();
    this.calls.push({ method, path });
    if (this.offline) throw new TypeError("fetch failed");
    if (this.latencyMs > 0) await delay(this.latencyMs, init?.signal ?? null);
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (method === "GET" && path === "/healthz") {
      return json({ status: "ok", checkpoint: STUB_CHECKPOINT });
    }
    if (method === "GET" && path === "/attributes") {
      return json({ attributes: ATTRIBUTES });
    }
    if (method === "POST" && path === "/session") {
      const side = typeof body.resolution === "number" ? body.resolution : this.resolution;
      const session: StubSession = {
        id: `s${++this.counter}`,
        version: 0,
        labels: new Int32Array(side * side),
        side,
        attributes: Object.fromEntries(ATTRIBUTES.map((name) => [name, 0])),
        undo: [],
      };
      this.sessions.set(session.id, session);
      return json({ id: session.id, version: 0 });
    }

    let match = path.match(/^\/session\/([^/]+)$/);
    if (method === "GET" && match) {
      const session = this.sessions.get(match[1]!);
      if (!session) return json({ detail: "unknown session" }, 404);
      return json({
        id: session.id,
        version: session.version,
        height: session.side,
        width: session.side,
        num_classes: NUM_CLASSES,
        attribute_names: ATTRIBUTES,
        attributes: session.attributes,
        labels: fakeBlob("labels", session.id, session.version),
        undo_stack: [],
        undo_limit: 16,
      });
    }

    match = path.match(/^\/session\/([^/]+)\/layout-edit$/);
    if (method === "POST" && match) {
      const session = this.sessions.get(match[1]!);
      if (!session) return json({ detail: "unknown session" }, 404);
      if (this.failNextEdit) {
        const detail = this.failNextEdit;
        this.failNextEdit = null;
        return json({ detail }, 400);
      }
      const label = body.label as number;
      if (!Number.isInteger(label) || label < 0 || label >= NUM_CLASSES) {
        return json({ detail: `label ${label} out of range` }, 400);
      }
      session.undo.push(session.labels.slice());
      applyEdit(session, body, label);
      session.version++;
      return json({ id: session.id, version: session.version });
    }

    match = path.match(/^\/session\/([^/]+)\/undo$/);
    if (method === "POST" && match) {
      const session = this.sessions.get(match[1]!);
      if (!session) return json({ detail: "unknown session" }, 404);
      const previous = session.undo.pop();
      if (!previous) return json({ detail: "nothing to undo" }, 400);
      session.labels = previous;
      session.version++;
      return json({ id: session.id, version: session.version });
    }

    match = path.match(/^\/session\/([^/]+)\/attributes$/);
    if (method === "POST" && match) {
      const session = this.sessions.get(match[1]!);
      if (!session) return json({ detail: "unknown session" }, 404);
      const bad = this.checkAttributes(body.attributes);
      if (bad) return bad;
      Object.assign(session.attributes, body.attributes as AttributeMap);
      return json({ id: session.id, attributes: session.attributes });
    }

    if (method === "POST" && path === "/hallucinate") {
      return this.hallucinate(body);
    }
    if (method === "POST" && path === "/hallucinate/sweep") {
      const attribute = body.attribute as string;
      if (!ATTRIBUTES.includes(attribute)) {
        return json({ detail: `unknown attribute ${attribute}` }, 400);
      }
      const values = [0, 0.25, 0.5, 0.75, 1];
      const images = values.map((value) =>
        fakeBlob("image", body.session, { ...(body.attributes as AttributeMap), [attribute]: value }, body.seed),
      );
      return json({ images, values, attribute, seed: body.seed ?? 0, checkpoint: STUB_CHECKPOINT });
    }

    if (method === "POST" && path === "/manipulate") {
      if (typeof body.image !== "string" || body.image.length === 0) {
        return json({ detail: "image is required" }, 400);
      }
      const bad = this.checkAttributes(body.attributes);
      if (bad) return bad;
      const seed = (body.seed as number) ?? 0;
      const result = this.manipulationResult(body, seed);
      if (body.wait) return json(result);
      const job: StubJob = {
        id: `j${++this.counter}`,
        pollsLeft: this.pollsUntilDone,
        result,
        failure: this.failJobs,
      };
      this.jobs.set(job.id, job);
      return json({ job: job.id, seed, checkpoint: STUB_CHECKPOINT });
    }

    match = path.match(/^\/jobs\/([^/]+)$/);
    if (method === "GET" && match) {
      const job = this.jobs.get(match[1]!);
      if (!job) return json({ detail: "unknown job" }, 404);
      if (job.pollsLeft > 0) {
        job.pollsLeft--;
        return json({ status: "running", stage: STAGES[job.pollsLeft % STAGES.length] });
      }
      if (job.failure) {
        return json({ status: "error", error: job.failure.message, stage: job.failure.stage });
      }
      return json({ status: "done", result: job.result });
    }

    return json({ detail: `no route for ${method} ${path}` }, 404);
  }

  private hallucinate(body: Record<string, unknown>): Response {
    const hasSession = typeof body.session === "string";
    const hasLayout = typeof body.layout === "string";
    if (hasSession === hasLayout) {
      return json({ detail: "provide exactly one of session or layout" }, 400);
    }
    let layoutFingerprint: unknown;
    if (hasSession) {
      const session = this.sessions.get(body.session as string);
      if (!session) return json({ detail: "unknown session" }, 404);
      layoutFingerprint = [session.id, checksum(session.labels)];
    } else {
      layoutFingerprint = body.layout;
    }
    const bad = this.checkAttributes(body.attributes);
    if (bad) return bad;
    const seed = (body.seed as number) ?? 0;
    return json({
      image: fakeBlob("image", layoutFingerprint, body.attributes, seed),
      seed,
      checkpoint: STUB_CHECKPOINT,
    });
  }

  private manipulationResult(body: Record<string, unknown>, seed: number): ManipulationPayload {
    const stages: Record<string, string> = {};
    for (const stage of STAGES) {
      stages[stage] = fakeBlob(stage, body.image, body.attributes, seed);
    }
    return {
      final: stages[STAGES[STAGES.length - 1]!]!,
      hallucination: fakeBlob("hallucination", body.image, body.attributes, seed),
      timings: { hallucinate: 0.01, stylize: 0.04, smooth_affinity: 0.05, screened_poisson: 0.03 },
      seed,
      checkpoint: STUB_CHECKPOINT,
      stages,
    };
  }

  private checkAttributes(attributes: unknown): Response | null {
    if (attributes === undefined || attributes === null) {
      return json({ detail: "attributes are required" }, 400);
    }
    if (Array.isArray(attributes)) {
      if (attributes.length !== ATTRIBUTES.length) {
        return json({ detail: `expected ${ATTRIBUTES.length} attribute values` }, 400);
      }
      return null;
    }
    for (const [name, value] of Object.entries(attributes as AttributeMap)) {
      if (!ATTRIBUTES.includes(name)) return json({ detail: `unknown attribute ${name}` }, 400);
      if (typeof value !== "number" || value < 0 || value > 1) {
        return json({ detail: `attribute ${name} must be in [0, 1]` }, 400);
      }
    }
    return null;
  }
}

/** Rewrites concrete URLs back to their documented templates. */
export function pathTemplate(method: string, path: string): string {
  const templated = path
    .replace(/^\/session\/[^/]+/, "/session/{session_id}")
    .replace(/^\/jobs\/[^/]+$/, "/jobs/{job_id}");
  return `${method} ${templated}`;
}

function applyEdit(session: StubSession, body: Record<string, unknown>, label: number): void {
  const brush = body.brush as { path: [number, number][]; radius: number } | undefined;
  if (brush) {
    for (const [x, y] of brush.path) {
      stampDisk(session, x, y, brush.radius, label);
    }
    return;
  }
  const polygon = body.polygon as [number, number][] | undefined;
  if (polygon) {
    // crude but deterministic: fill the polygon's bounding box
    const xs = polygon.map((p) => p[0]);
    const ys = polygon.map((p) => p[1]);
    for (let y = Math.max(0, Math.ceil(Math.min(...ys))); y <= Math.min(session.side - 1, Math.floor(Math.max(...ys))); y++) {
      for (let x = Math.max(0, Math.ceil(Math.min(...xs))); x <= Math.min(session.side - 1, Math.floor(Math.max(...xs))); x++) {
        session.labels[y * session.side + x] = label;
      }
    }
  }
}

function stampDisk(session: StubSession, cx: number, cy: number, radius: number, label: number): void {
  for (let y = Math.max(0, Math.floor(cy - radius)); y <= Math.min(session.side - 1, Math.ceil(cy + radius)); y++) {
    for (let x = Math.max(0, Math.floor(cx - radius)); x <= Math.min(session.side - 1, Math.ceil(cx + radius)); x++) {
      if ((x - cx) ** 2 + (y - cy) ** 2 <= radius * radius) {
        session.labels[y * session.side + x] = label;
      }
    }
  }
}

function checksum(labels: Int32Array): number {
  let hash = 0;
  for (const value of labels) hash = (hash * 31 + value + 1) >>> 0;
  return hash;
}

/** Deterministic stand-in for a PNG payload: base64 of the inputs. */
function fakeBlob(...parts: unknown[]): string {
  return btoa(JSON.stringify(parts));
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function delay(ms: number, signal: AbortSignal | null): Promise<void> {
  return new Promise((resolve, reject) => {
    if (signal?.aborted) {
      reject(new DOMException("aborted", "AbortError"));
      return;
    }
    const timer = setTimeout(() => {
      signal?.removeEventListener("abort", onAbort);
      resolve();
    }, ms);
    const onAbort = (): void => {
      clearTimeout(timer);
      reject(new DOMException("aborted", "AbortError"));
    };
    signal?.addEventListener("abort", onAbort);
  });
}
