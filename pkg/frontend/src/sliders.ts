/** Attribute slider state: clamped [0, 1] values on a 0.01 grid. */

import type { AttributeMap } from "./types.js";

export const SLIDER_STEP = 0.01;

export interface Preset {
  name: string;
  values: AttributeMap;
}

export const PRESETS: Preset[] = [
  { name: "Clear day", values: {} },
  { name: "Golden hour", values: { sunset: 0.9, clouds: 0.2 } },
  { name: "Night", values: { night: 1.0 } },
  { name: "Winter + clouds", values: { snow: 0.9, clouds: 0.8 } },
  { name: "Foggy autumn", values: { fog: 0.7, autumn: 0.8, dry: 0.3 } },
];

export class SliderPanelModel {
  private values: Map<string, number>;

  constructor(readonly names: string[]) {
    if (names.length === 0) throw new Error("slider panel needs at least one attribute");
    this.values = new Map(names.map((name) => [name, 0]));
  }

  get(name: string): number {
    const value = this.values.get(name);
    if (value === undefined) throw new Error(`unknown attribute ${name}`);
    return value;
  }

  /** Set one slider; out-of-range input clamps, then snaps to the step grid. */
  set(name: string, value: number): number {
    if (!this.values.has(name)) throw new Error(`unknown attribute ${name}`);
    if (!Number.isFinite(value)) throw new Error(`attribute ${name} must be finite`);
    const clamped = Math.min(1, Math.max(0, value));
    const snapped = Math.round(clamped / SLIDER_STEP) * SLIDER_STEP;
    // Round the float noise off so the displayed text and the sent value agree.
    const exact = Number(snapped.toFixed(2));
    this.values.set(name, exact);
    return exact;
  }

  applyPreset(preset: Preset): void {
    for (const name of this.names) {
      this.set(name, preset.values[name] ?? 0);
    }
  }

  /** The exact values shown in the panel, keyed by attribute name. */
  asMap(): AttributeMap {
    const out: AttributeMap = {};
    for (const name of this.names) out[name] = this.values.get(name)!;
    return out;
  }

  /** Attributes with the largest nonzero values, strongest first. */
  topThree(): string[] {
    return this.names
      .filter((name) => this.values.get(name)! > 0)
      .sort((a, b) => this.values.get(b)! - this.values.get(a)!)
      .slice(0, 3);
  }
}
