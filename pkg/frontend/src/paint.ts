/** Brush painting: optimistic local edits, rate-limited server sync, undo. */

import type { StudioClient } from "./api.js";
import { CanvasLayoutModel } from "./canvas.js";
import type { LayoutEdit, Point } from "./types.js";

/** Minimum spacing between layout-edit requests (caps bursts at 5/s). */
export const EDIT_SPACING_MS = 200;

interface QueuedOp {
  kind: "edit" | "undo";
  edit?: LayoutEdit;
  /** Local raster before this op, for rollback if the server rejects it. */
  before: Int32Array;
}

export class PaintController {
  label = 1;
  radius = 6;
  serverVersion = 0;
  private stroke: Point[] | null = null;
  private strokeBefore: Int32Array | null = null;
  private strokeTouched = 0;
  private queue: QueuedOp[] = [];
  private inFlight = false;
  private lastSentAt = -Infinity;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly client: StudioClient,
    readonly model: CanvasLayoutModel,
    private readonly sessionId: string,
    private readonly onToast: (message: string) => void = () => {},
    private readonly onChange: () => void = () => {},
  ) {}

  strokeStart(point: Point): void {
    if (this.stroke) this.strokeEnd();
    this.strokeBefore = this.model.snapshot();
    this.stroke = [point];
    this.strokeTouched = this.model.stampBrush([point], this.label, this.radius);
    this.onChange();
  }

  strokeMove(point: Point): void {
    if (!this.stroke) return;
    const last = this.stroke[this.stroke.length - 1]!;
    this.stroke.push(point);
    this.strokeTouched += this.model.stampBrush([last, point], this.label, this.radius);
    this.onChange();
  }

  strokeEnd(): void {
    const path = this.stroke;
    const before = this.strokeBefore;
    const touched = this.strokeTouched;
    this.stroke = null;
    this.strokeBefore = null;
    this.strokeTouched = 0;
    if (!path || !before) return;
    if (touched === 0) return; // never reached the canvas — nothing to send
    this.model.pushUndoPoint(before);
    this.enqueue({
      kind: "edit",
      edit: {
        label: this.label,
        brush: { path: path.map((p) => [p.x, p.y]), radius: this.radius },
      },
      before,
    });
    this.onChange();
  }

  undo(): boolean {
    const before = this.model.snapshot();
    if (!this.model.undo()) return false;
    this.enqueue({ kind: "undo", before });
    this.onChange();
    return true;
  }

  /** Local-only redo; the server session keeps its own linear history. */
  redo(): boolean {
    const moved = this.model.redo();
    if (moved) this.onChange();
    return moved;
  }

  get pending(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  private enqueue(op: QueuedOp): void {
    this.queue.push(op);
    this.pump();
  }

  private pump(): void {
    if (this.inFlight || this.timer !== null || this.queue.length === 0) return;
    const wait = Math.max(0, EDIT_SPACING_MS - (Date.now() - this.lastSentAt));
    this.timer = setTimeout(() => {
      this.timer = null;
      this.send();
    }, wait);
  }

  private send(): void {
    const op = this.queue.shift();
    if (!op) return;
    this.inFlight = true;
    this.lastSentAt = Date.now();
    const request =
      op.kind === "edit"
        ? this.client.editLayout(this.sessionId, op.edit!)
        : this.client.undoEdit(this.sessionId);
    request
      .then((info) => {
        this.serverVersion = info.version;
        this.onChange();
      })
      .catch((error: unknown) => {
        // The server refused: local raster rolls back to the last agreed
        // state, and anything painted on top of the rejected op goes with it.
        this.model.adopt(op.before, this.model.version + 1);
        this.queue = [];
        this.onToast(error instanceof Error ? error.message : String(error));
        this.onChange();
      })
      .finally(() => {
        this.inFlight = false;
        this.pump();
      });
  }
}
