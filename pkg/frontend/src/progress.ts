// Live progress panel: discovered feature list and the scattering curve,
// polled from the metrics endpoint. Display only; no local inference.

import type { MetricsView } from "./api.js";
import { curvePoints, formatG, progressSummary } from "./viewmodel.js";

const W = 260;
const H = 120;

export function renderProgress(root: HTMLElement, metrics: MetricsView): void {
  root.replaceChildren();
  const title = document.createElement("div");
  title.className = "progress-summary";
  title.textContent = progressSummary(metrics);
  root.append(title);

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("class", "g-curve");
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  const pts = curvePoints(metrics.g_curve, W, H);
  line.setAttribute("points", pts.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" "));
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "currentColor");
  line.setAttribute("stroke-width", "2");
  svg.append(line);
  root.append(svg);

  const axis = document.createElement("div");
  axis.className = "axis-note";
  axis.textContent = `indistinguishability g after each feature (now ${formatG(metrics.g)})`;
  root.append(axis);

  const list = document.createElement("ol");
  list.className = "feature-list";
  for (const name of metrics.features) {
    const li = document.createElement("li");
    li.textContent = name;
    list.append(li);
  }
  root.append(list);
}
