/** Forecast-drawing state: exactly one draggable handle per horizon step. */

import { Domain } from "./scale.js";

export interface DrawingPoint {
  step: number;
  value: number;
}

export class AlreadyCommitted extends Error {}

export class DrawingState {
  readonly points: DrawingPoint[];
  private committedFlag = false;

  constructor(
    readonly itemId: string,
    readonly pass: "without" | "with",
    readonly horizon: number,
    initialValue: number,
    readonly valueDomain: Domain,
  ) {
    if (horizon < 1) throw new Error("horizon must be positive");
    const start = this.clampValue(initialValue);
    // Handles start at the last history value: a neutral flat prior.
    this.points = Array.from({ length: horizon }, (_, step) => ({
      step,
      value: start,
    }));
  }

  private clampValue(value: number): number {
    return Math.min(this.valueDomain.max, Math.max(this.valueDomain.min, value));
  }

  get committed(): boolean {
    return this.committedFlag;
  }

  moveHandle(step: number, value: number): void {
    if (this.committedFlag) throw new AlreadyCommitted("drawing is locked");
    if (step < 0 || step >= this.horizon) {
      throw new Error(`step ${step} outside horizon ${this.horizon}`);
    }
    if (!Number.isFinite(value)) throw new Error("value must be finite");
    this.points[step] = { step, value: this.clampValue(value) };
  }

  values(): number[] {
    return this.points.map((p) => p.value);
  }

  /** Lock the drawing and produce the submission body. */
  commit(): { pass: "without" | "with"; values: number[] } {
    if (this.committedFlag) throw new AlreadyCommitted("already committed");
    this.committedFlag = true;
    return { pass: this.pass, values: this.values() };
  }
}
