/** Page bootstrap: wires the session flow to the chart and controls. */

import { StudyApi } from "./api.js";
import { SessionFlow } from "./app.js";
import { ForecastChart } from "./chart.js";
import { DrawingState } from "./drawing.js";
import { headroomDomain } from "./scale.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function setBanner(text: string | null): void {
  const banner = byId<HTMLDivElement>("banner");
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function renderState(flow: SessionFlow): void {
  const item = flow.state.item;
  setBanner(flow.state.banner);
  byId<HTMLDivElement>("consent-view").style.display =
    flow.state.phase === "idle" ? "block" : "none";
  byId<HTMLDivElement>("item-view").style.display =
    flow.state.phase === "drawing" || flow.state.phase === "labeling" ? "block" : "none";
  byId<HTMLDivElement>("done-view").style.display =
    flow.state.phase === "done" ? "block" : "none";
  if (!item) return;

  byId<HTMLSpanElement>("progress").textContent =
    `${flow.state.completedSubmissions} submissions so far`;

  const chartHost = byId<HTMLDivElement>("chart");
  chartHost.replaceChildren();
  const domain = headroomDomain(
    item.reference_forecast ? item.history.concat(item.reference_forecast) : item.history,
  );
  const chart = new ForecastChart(item.history, item.horizon, domain);
  chartHost.appendChild(chart.svg);

  const explanationPanel = byId<HTMLDivElement>("explanation");
  // Part-1 without-pass payloads carry no explanation by design.
  explanationPanel.style.display = item.explanation ? "block" : "none";
  explanationPanel.textContent = item.explanation ?? "";

  const commitButton = byId<HTMLButtonElement>("commit");
  const labelButtons = byId<HTMLDivElement>("label-buttons");

  if (flow.state.phase === "drawing") {
    commitButton.style.display = "inline-block";
    labelButtons.style.display = "none";
    byId<HTMLSpanElement>("pass-name").textContent =
      item.pass === "without"
        ? "Draw your forecast (no explanation yet)"
        : "Draw again, using the explanation";
    const drawing: DrawingState = flow.newDrawing();
    chart.bindDrawing(drawing);
    commitButton.onclick = async () => {
      commitButton.disabled = true;
      chart.lock();
      try {
        await flow.submitDrawing(drawing);
      } finally {
        commitButton.disabled = false;
      }
      renderState(flow);
    };
  } else {
    commitButton.style.display = "none";
    labelButtons.style.display = "block";
    byId<HTMLSpanElement>("pass-name").textContent =
      "Was this explanation useful for understanding the forecast?";
    if (item.reference_forecast) chart.showReference(item.reference_forecast);
    for (const label of ["useful", "not_useful"] as const) {
      byId<HTMLButtonElement>(`label-${label}`).onclick = async () => {
        await flow.submitLabel(label);
        renderState(flow);
      };
    }
  }
}

export function mount(): void {
  const api = new StudyApi("");
  byId<HTMLButtonElement>("start").onclick = async () => {
    const annotator = byId<HTMLInputElement>("annotator-id").value.trim();
    const part = byId<HTMLSelectElement>("part").value === "2" ? 2 : 1;
    const consent = byId<HTMLInputElement>("consent").checked;
    const flow = new SessionFlow(api, part);
    try {
      await flow.start(annotator || "anonymous", consent);
    } catch (error) {
      setBanner(error instanceof Error ? error.message : String(error));
      return;
    }
    renderState(flow);
  };
}

if (typeof document !== "undefined" && document.getElementById("start")) {
  mount();
}
