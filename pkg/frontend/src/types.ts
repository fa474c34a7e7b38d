/** Shared request/response shapes of the studio HTTP API. */

export type AttributeMap = Record<string, number>;

export interface Point {
  x: number;
  y: number;
}

export interface BrushEdit {
  label: number;
  brush: { path: [number, number][]; radius: number };
}

export interface PolygonEdit {
  label: number;
  polygon: [number, number][];
}

export type LayoutEdit = BrushEdit | PolygonEdit;

export interface SessionInfo {
  id: string;
  version: number;
}

export interface SessionSnapshot {
  id: string;
  version: number;
  height: number;
  width: number;
  num_classes: number;
  attribute_names: string[];
  attributes: AttributeMap;
  labels: string;
  undo_stack: string[];
  undo_limit: number;
}

export interface HallucinationResult {
  image: string;
  seed: number;
  checkpoint: string;
}

export interface ManipulationPayload {
  final: string;
  hallucination: string;
  timings: Record<string, number>;
  seed: number;
  checkpoint: string;
  stages?: Record<string, string>;
}

export interface JobTicket {
  job: string;
  seed: number;
  checkpoint: string;
}

export interface JobStatus {
  status: "queued" | "running" | "done" | "error";
  result?: ManipulationPayload;
  error?: string;
  stage?: string;
}

export interface HallucinateRequest {
  session?: string;
  layout?: string;
  attributes: AttributeMap;
  seed?: number;
}

export interface ManipulateRequest extends HallucinateRequest {
  image: string;
  dump_stages?: boolean;
}
