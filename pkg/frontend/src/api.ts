/** Typed client for the studio service; the UI talks to nothing else. */

import type {
  AttributeMap,
  HallucinateRequest,
  HallucinationResult,
  JobStatus,
  JobTicket,
  LayoutEdit,
  ManipulateRequest,
  ManipulationPayload,
  SessionInfo,
  SessionSnapshot,
} from "./types.js";

/** Every path template the service documents; the client never leaves this set. */
export const DOCUMENTED_PATHS = [
  "GET /healthz",
  "GET /attributes",
  "POST /checkpoint",
  "POST /session",
  "GET /session/{session_id}",
  "POST /session/{session_id}/layout-edit",
  "POST /session/{session_id}/undo",
  "POST /session/{session_id}/attributes",
  "POST /hallucinate",
  "POST /hallucinate/sweep",
  "POST /manipulate",
  "GET /jobs/{job_id}",
] as const;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly stage?: string,
  ) {
    super(detail);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudioClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload.detail ?? response.statusText, payload.stage);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; checkpoint: string | null }> {
    return this.request("GET", "/healthz");
  }

  attributeNames(): Promise<string[]> {
    return this.request<{ attributes: string[] }>("GET", "/attributes").then(
      (body) => body.attributes,
    );
  }

  createSession(layout?: string, resolution?: number): Promise<SessionInfo> {
    return this.request("POST", "/session", { layout, resolution });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/session/${sessionId}`);
  }

  editLayout(sessionId: string, edit: LayoutEdit): Promise<SessionInfo> {
    return this.request("POST", `/session/${sessionId}/layout-edit`, edit);
  }

  undoEdit(sessionId: string): Promise<SessionInfo> {
    return this.request("POST", `/session/${sessionId}/undo`);
  }

  setAttributes(sessionId: string, attributes: AttributeMap): Promise<{ attributes: AttributeMap }> {
    return this.request("POST", `/session/${sessionId}/attributes`, { attributes });
  }

  hallucinate(body: HallucinateRequest, signal?: AbortSignal): Promise<HallucinationResult> {
    return this.request("POST", "/hallucinate", body, signal);
  }

  startManipulation(body: ManipulateRequest): Promise<JobTicket> {
    return this.request("POST", "/manipulate", { ...body, wait: false });
  }

  manipulate(body: ManipulateRequest): Promise<ManipulationPayload> {
    return this.request("POST", "/manipulate", { ...body, wait: true });
  }

  jobStatus(jobId: string): Promise<JobStatus> {
    return this.request("GET", `/jobs/${jobId}`);
  }
}
