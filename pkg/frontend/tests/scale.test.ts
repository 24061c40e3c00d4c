import { describe, expect, it } from "vitest";

import { LinearScale, headroomDomain } from "../src/scale.js";

describe("LinearScale", () => {
  const scale = new LinearScale({ min: 12.5, max: 987.25 }, 40, 680);

  it("round-trips pixel -> value -> pixel within half a pixel", () => {
    for (let pixel = 40; pixel <= 680; pixel += 1) {
      const back = scale.toPixel(scale.toValue(pixel));
      expect(Math.abs(back - pixel)).toBeLessThan(0.5);
    }
  });

  it("round-trips value -> pixel -> value within half a pixel of value space", () => {
    const perPixel = (987.25 - 12.5) / (680 - 40);
    for (let i = 0; i <= 100; i += 1) {
      const value = 12.5 + (i / 100) * (987.25 - 12.5);
      const back = scale.toValue(scale.toPixel(value));
      expect(Math.abs(back - value)).toBeLessThan(0.5 * perPixel);
    }
  });

  it("survives rounding to whole device pixels", () => {
    for (let i = 0; i <= 50; i += 1) {
      const value = 12.5 + (i / 50) * (987.25 - 12.5);
      const rounded = Math.round(scale.toPixel(value));
      expect(Math.abs(scale.toPixel(scale.toValue(rounded)) - rounded)).toBeLessThan(0.5);
    }
  });

  it("maps endpoints exactly", () => {
    expect(scale.toPixel(12.5)).toBe(40);
    expect(scale.toPixel(987.25)).toBe(680);
  });

  it("supports inverted pixel ranges (SVG y-axis)", () => {
    const y = new LinearScale({ min: 0, max: 10 }, 360, 20);
    expect(y.toPixel(0)).toBe(360);
    expect(y.toPixel(10)).toBe(20);
    expect(y.toValue(190)).toBeCloseTo(5, 10);
  });

  it("rejects degenerate domains", () => {
    expect(() => new LinearScale({ min: 5, max: 5 }, 0, 10)).toThrow();
  });

  it("clamps values into the domain", () => {
    expect(scale.clamp(-100)).toBe(12.5);
    expect(scale.clamp(5000)).toBe(987.25);
    expect(scale.clamp(500)).toBe(500);
  });
});

describe("headroomDomain", () => {
  it("extends the observed range by 50% on each side", () => {
    const domain = headroomDomain([10, 20, 30]);
    expect(domain.min).toBe(0);
    expect(domain.max).toBe(40);
  });

  it("gives flat series room to draw", () => {
    const domain = headroomDomain([5, 5, 5]);
    expect(domain.min).toBeLessThan(5);
    expect(domain.max).toBeGreaterThan(5);
  });
});
