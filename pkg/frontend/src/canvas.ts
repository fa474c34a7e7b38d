/** Client-side label raster: brush/polygon painting with exact undo/redo. */

import type { Point } from "./types.js";

export class CanvasLayoutModel {
  labels: Int32Array;
  version = 0;
  private undoStack: Int32Array[] = [];
  private redoStack: Int32Array[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
    readonly numClasses: number,
    readonly undoLimit = 50,
  ) {
    this.labels = new Int32Array(width * height);
  }

  snapshot(): Int32Array {
    return this.labels.slice();
  }

  /** Paint a disk of `radius` along the polyline; returns pixels changed. */
  applyBrush(path: Point[], label: number, radius: number): number {
    this.checkLabel(label);
    const mask = this.brushMask(path, radius);
    return this.commit(mask, label);
  }

  applyPolygon(points: Point[], label: number): number {
    this.checkLabel(label);
    if (points.length < 3) {
      throw new Error("polygon edits need at least 3 points");
    }
    return this.commit(polygonMask(points, this.width, this.height), label);
  }

  /** Stamp a brush segment without recording an undo entry (mid-stroke). */
  stampBrush(path: Point[], label: number, radius: number): number {
    this.checkLabel(label);
    const mask = this.brushMask(path, radius);
    let painted = 0;
    for (let i = 0; i < mask.length; i++) {
      if (mask[i]) {
        if (this.labels[i] !== label) this.labels[i] = label;
        painted++;
      }
    }
    return painted;
  }

  pushUndoPoint(before: Int32Array): void {
    this.undoStack.push(before);
    if (this.undoStack.length > this.undoLimit) this.undoStack.shift();
    this.redoStack = [];
    this.version++;
  }

  undo(): boolean {
    const previous = this.undoStack.pop();
    if (!previous) return false;
    this.redoStack.push(this.labels);
    this.labels = previous;
    this.version++;
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (!next) return false;
    this.undoStack.push(this.labels);
    this.labels = next;
    this.version++;
    return true;
  }

  /** Replace the raster wholesale (adopting a server-loaded session). */
  adopt(labels: Int32Array, version: number): void {
    if (labels.length !== this.labels.length) {
      throw new Error(`raster is ${labels.length} px, canvas needs ${this.labels.length}`);
    }
    this.labels = labels.slice();
    this.version = version;
    this.undoStack = [];
    this.redoStack = [];
  }

  private commit(mask: Uint8Array, label: number): number {
    let painted = 0;
    for (let i = 0; i < mask.length; i++) if (mask[i]) painted++;
    if (painted === 0) return 0;
    this.pushUndoPoint(this.labels.slice());
    for (let i = 0; i < mask.length; i++) {
      if (mask[i]) this.labels[i] = label;
    }
    return painted;
  }

  private brushMask(path: Point[], radius: number): Uint8Array {
    if (path.length === 0 || radius <= 0) {
      throw new Error("brush strokes need at least one point and a positive radius");
    }
    const mask = new Uint8Array(this.width * this.height);
    let previous = path[0]!;
    stampDisk(mask, previous, radius, this.width, this.height);
    for (const point of path.slice(1)) {
      stampSegment(mask, previous, point, radius, this.width, this.height);
      previous = point;
    }
    return mask;
  }

  private checkLabel(label: number): void {
    if (!Number.isInteger(label) || label < 0 || label >= this.numClasses) {
      throw new Error(`label ${label} outside [0, ${this.numClasses})`);
    }
  }
}

function stampDisk(mask: Uint8Array, center: Point, radius: number, w: number, h: number): void {
  const r2 = radius * radius;
  const y0 = Math.max(0, Math.floor(center.y - radius));
  const y1 = Math.min(h - 1, Math.ceil(center.y + radius));
  const x0 = Math.max(0, Math.floor(center.x - radius));
  const x1 = Math.min(w - 1, Math.ceil(center.x + radius));
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const dx = x - center.x;
      const dy = y - center.y;
      if (dx * dx + dy * dy <= r2) mask[y * w + x] = 1;
    }
  }
}

function stampSegment(mask: Uint8Array, a: Point, b: Point, radius: number, w: number, h: number): void {
  const steps = Math.max(1, Math.ceil(Math.hypot(b.x - a.x, b.y - a.y) / Math.max(0.5, radius / 2)));
  for (let s = 0; s <= steps; s++) {
    const t = s / steps;
    stampDisk(mask, { x: a.x + t * (b.x - a.x), y: a.y + t * (b.y - a.y) }, radius, w, h);
  }
}

/** Even-odd scanline fill; geometry outside the canvas clips away. */
function polygonMask(points: Point[], w: number, h: number): Uint8Array {
  const mask = new Uint8Array(w * h);
  const n = points.length;
  for (let y = 0; y < h; y++) {
    const cy = y + 0.5;
    const crossings: number[] = [];
    for (let i = 0; i < n; i++) {
      const a = points[i]!;
      const b = points[(i + 1) % n]!;
      if (a.y <= cy === b.y <= cy) continue;
      crossings.push(a.x + ((cy - a.y) / (b.y - a.y)) * (b.x - a.x));
    }
    crossings.sort((p, q) => p - q);
    for (let k = 0; k + 1 < crossings.length; k += 2) {
      const x0 = Math.max(0, Math.ceil(crossings[k]! - 0.5));
      const x1 = Math.min(w - 1, Math.floor(crossings[k + 1]! - 0.5));
      for (let x = x0; x <= x1; x++) mask[y * w + x] = 1;
    }
  }
  return mask;
}
