/** SVG plot: history polyline, optional reference forecast, and one
 * draggable handle per horizon step during drawing passes. */

import { DrawingState } from "./drawing.js";
import { Domain, LinearScale } from "./scale.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartConfig {
  width: number;
  height: number;
  margin: number;
}

const DEFAULT_CONFIG: ChartConfig = { width: 720, height: 360, margin: 40 };

function element<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function polylinePoints(xs: number[], ys: number[]): string {
  return xs.map((x, i) => `${x},${ys[i]}`).join(" ");
}

export class ForecastChart {
  readonly svg: SVGSVGElement;
  private readonly xScale: LinearScale;
  private readonly yScale: LinearScale;
  private handles: SVGCircleElement[] = [];

  constructor(
    readonly history: number[],
    readonly horizon: number,
    valueDomain: Domain,
    private readonly config: ChartConfig = DEFAULT_CONFIG,
  ) {
    const { width, height, margin } = config;
    this.svg = element("svg", {
      viewBox: `0 0 ${width} ${height}`,
      width,
      height,
      class: "forecast-chart",
    });
    const steps = history.length + horizon - 1;
    this.xScale = new LinearScale({ min: 0, max: steps }, margin, width - margin);
    // SVG y grows downward: map domain max to the top margin.
    this.yScale = new LinearScale(valueDomain, height - margin, margin);

    const historyXs = history.map((_, i) => this.xForStep(i));
    const historyYs = history.map((v) => this.yScale.toPixel(v));
    this.svg.appendChild(
      element("polyline", {
        points: polylinePoints(historyXs, historyYs),
        fill: "none",
        stroke: "#2b6cb0",
        "stroke-width": 2,
        class: "history-line",
      }),
    );
    // Shade the horizon region annotators draw into.
    const horizonStart = this.xForStep(history.length - 1);
    this.svg.insertBefore(
      element("rect", {
        x: horizonStart,
        y: margin,
        width: this.xForStep(steps) - horizonStart,
        height: height - 2 * margin,
        fill: "#f0f4f8",
        class: "horizon-region",
      }),
      this.svg.firstChild,
    );
  }

  private xForStep(step: number): number {
    return this.xScale.toPixel(step);
  }

  /** Plot the reference forecast (part 2 view). */
  showReference(values: number[]): void {
    const offset = this.history.length;
    const xs = values.map((_, i) => this.xForStep(offset + i));
    const ys = values.map((v) => this.yScale.toPixel(v));
    const lead = this.xForStep(offset - 1);
    const leadY = this.yScale.toPixel(this.history[this.history.length - 1]);
    this.svg.appendChild(
      element("polyline", {
        points: `${lead},${leadY} ` + polylinePoints(xs, ys),
        fill: "none",
        stroke: "#dd6b20",
        "stroke-width": 2,
        "stroke-dasharray": "6 3",
        class: "reference-line",
      }),
    );
  }

  /** Attach draggable handles bound to a drawing state. */
  bindDrawing(drawing: DrawingState, onChange?: () => void): void {
    this.handles.forEach((handle) => handle.remove());
    this.handles = drawing.points.map((point) => {
      const handle = element("circle", {
        cx: this.xForStep(this.history.length + point.step),
        cy: this.yScale.toPixel(point.value),
        r: 7,
        fill: "#38a169",
        class: "forecast-handle",
        "data-step": point.step,
      });
      this.attachDrag(handle, drawing, point.step, onChange);
      this.svg.appendChild(handle);
      return handle;
    });
  }

  private attachDrag(
    handle: SVGCircleElement,
    drawing: DrawingState,
    step: number,
    onChange?: () => void,
  ): void {
    const onPointerMove = (event: PointerEvent) => {
      const rect = this.svg.getBoundingClientRect();
      const pixelY = ((event.clientY - rect.top) / rect.height) * this.config.height;
      drawing.moveHandle(step, this.yScale.clamp(this.yScale.toValue(pixelY)));
      handle.setAttribute("cy", String(this.yScale.toPixel(drawing.points[step].value)));
      onChange?.();
    };
    handle.addEventListener("pointerdown", (event) => {
      if (drawing.committed) return;
      handle.setPointerCapture(event.pointerId);
      handle.addEventListener("pointermove", onPointerMove);
      handle.addEventListener(
        "pointerup",
        () => handle.removeEventListener("pointermove", onPointerMove),
        { once: true },
      );
    });
  }

  lock(): void {
    this.handles.forEach((handle) => handle.setAttribute("fill", "#a0aec0"));
  }
}
