/** Linear data<->pixel transforms for the plot axes. */

export interface Domain {
  min: number;
  max: number;
}

/**
 * Extend a value range by a headroom fraction on each side, so annotators
 * can draw above and below everything seen so far.  Degenerate (flat)
 * ranges get a unit of slack.
 */
export function headroomDomain(values: number[], fraction = 0.5): Domain {
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min;
  const pad = span > 0 ? span * fraction : Math.max(1, Math.abs(max) * fraction);
  return { min: min - pad, max: max + pad };
}

export class LinearScale {
  constructor(
    readonly domain: Domain,
    readonly pixelStart: number,
    readonly pixelEnd: number,
  ) {
    if (domain.max <= domain.min) {
      throw new Error(`degenerate domain [${domain.min}, ${domain.max}]`);
    }
    if (pixelEnd === pixelStart) {
      throw new Error("empty pixel range");
    }
  }

  toPixel(value: number): number {
    const t = (value - this.domain.min) / (this.domain.max - this.domain.min);
    return this.pixelStart + t * (this.pixelEnd - this.pixelStart);
  }

  toValue(pixel: number): number {
    const t = (pixel - this.pixelStart) / (this.pixelEnd - this.pixelStart);
    return this.domain.min + t * (this.domain.max - this.domain.min);
  }

  clamp(value: number): number {
    return Math.min(this.domain.max, Math.max(this.domain.min, value));
  }
}
