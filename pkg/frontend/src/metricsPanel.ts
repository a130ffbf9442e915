import type { MetricsPayload } from "./types.js";
import { fmtCount, fmtMetric, fmtProgress, rawAttr } from "./format.js";
import { renderLineChart } from "./chart.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function metricCell(name: string, raw: number | null, formatted: string): HTMLTableCellElement {
  const td = el("td", { "data-metric": name, "data-raw": rawAttr(raw) }, formatted);
  return td;
}

const CHECKPOINT_COLUMNS = [
  "iteration",
  "test_acc",
  "label_acc",
  "coverage",
  "n_lfs_selected",
  "tau",
] as const;

function renderCheckpoints(panel: HTMLElement, metrics: MetricsPayload): void {
  const section = el("div", { class: "checkpoints" });
  section.appendChild(el("h3", {}, "Checkpoints"));
  if (metrics.checkpoints.length === 0) {
    section.appendChild(
      el("p", { "data-role": "empty-checkpoints" }, "No checkpoints yet: submit more rules."),
    );
    panel.appendChild(section);
    return;
  }

  const chart = renderLineChart([
    {
      label: "test_acc",
      color: "#0f766e",
      points: metrics.checkpoints.map((c) => ({ x: c.iteration, y: c.test_acc })),
    },
    {
      label: "label_acc",
      color: "#9a3412",
      points: metrics.checkpoints.map((c) => ({ x: c.iteration, y: c.label_acc })),
    },
    {
      label: "coverage",
      color: "#1d4ed8",
      points: metrics.checkpoints.map((c) => ({ x: c.iteration, y: c.coverage })),
    },
  ]);
  section.appendChild(chart);

  const table = el("table", { "data-role": "checkpoint-table" });
  const head = el("tr");
  for (const col of CHECKPOINT_COLUMNS) head.appendChild(el("th", {}, col));
  head.appendChild(el("th", {}, "flagged"));
  table.appendChild(head);
  for (const c of metrics.checkpoints) {
    const tr = el("tr", { "data-iteration": String(c.iteration) });
    tr.appendChild(metricCell("iteration", c.iteration, fmtCount(c.iteration)));
    tr.appendChild(metricCell("test_acc", c.test_acc, fmtMetric(c.test_acc)));
    tr.appendChild(metricCell("label_acc", c.label_acc, fmtMetric(c.label_acc)));
    tr.appendChild(metricCell("coverage", c.coverage, fmtMetric(c.coverage)));
    tr.appendChild(metricCell("n_lfs_selected", c.n_lfs_selected, fmtCount(c.n_lfs_selected)));
    tr.appendChild(metricCell("tau", c.tau, fmtMetric(c.tau)));
    tr.appendChild(
      el("td", { "data-metric": "flagged", "data-raw": rawAttr(c.flagged) }, c.flagged ? "yes" : ""),
    );
    table.appendChild(tr);
  }
  section.appendChild(table);
  panel.appendChild(section);
}

function renderSelection(panel: HTMLElement, metrics: MetricsPayload): void {
  const section = el("div", { class: "selection" });
  section.appendChild(el("h3", {}, "Label functions"));
  const selection = metrics.selection;
  if (!selection) {
    section.appendChild(
      el("p", { "data-role": "empty-selection" }, "No rules evaluated yet."),
    );
    panel.appendChild(section);
    return;
  }
  section.appendChild(
    el("p", { "data-role": "selection-status", "data-raw": selection.status },
      `selection: ${selection.status}`),
  );

  const table = el("table", { "data-role": "lf-table" });
  const head = el("tr");
  for (const h of ["id", "rule", "activated", "valid acc", "selected"]) {
    head.appendChild(el("th", {}, h));
  }
  table.appendChild(head);
  const selected = new Set(selection.selected_ids);
  for (const row of selection.accuracies) {
    const pruned = !row.kept;
    const tr = el("tr", {
      "data-lf-id": String(row.lf_id),
      class: pruned ? "pruned" : selected.has(row.lf_id) ? "selected" : "",
    });
    tr.appendChild(el("td", { "data-raw": rawAttr(row.lf_id) }, String(row.lf_id)));
    const spec = el("td", { "data-raw": row.lf });
    if (pruned) {
      // below-random rules stay visible but struck through
      const s = el("s", {}, row.lf);
      spec.appendChild(s);
      spec.appendChild(el("span", { class: "prune-reason" }, " below random"));
    } else {
      spec.textContent = row.lf;
    }
    tr.appendChild(spec);
    tr.appendChild(el("td", { "data-raw": rawAttr(row.activated) }, fmtCount(row.activated)));
    tr.appendChild(
      el("td", { "data-metric": "lf_accuracy", "data-raw": rawAttr(row.accuracy) },
        fmtMetric(row.accuracy)),
    );
    tr.appendChild(el("td", {}, selected.has(row.lf_id) ? "yes" : pruned ? "pruned" : "no"));
    table.appendChild(tr);
  }
  section.appendChild(table);
  panel.appendChild(section);
}

/** Render the metrics snapshot (status, tau, curves, rule table). */
export function renderMetricsPanel(container: HTMLElement, metrics: MetricsPayload): void {
  container.textContent = "";
  const panel = el("section", { class: "metrics-panel" });
  container.appendChild(panel);

  panel.appendChild(el("h2", {}, "Session metrics"));
  const statusLine = el("p", { class: "status-line" });
  statusLine.appendChild(
    el("span", { "data-metric": "status", "data-raw": metrics.status }, metrics.status),
  );
  statusLine.appendChild(document.createTextNode(" | progress "));
  statusLine.appendChild(
    el(
      "span",
      { "data-metric": "iteration", "data-raw": rawAttr(metrics.iteration) },
      fmtProgress(metrics.iteration, metrics.budget),
    ),
  );
  statusLine.appendChild(document.createTextNode(" | rules "));
  statusLine.appendChild(
    el("span", { "data-metric": "n_lfs", "data-raw": rawAttr(metrics.n_lfs) },
      fmtCount(metrics.n_lfs)),
  );
  statusLine.appendChild(document.createTextNode(" | tau "));
  statusLine.appendChild(
    el("span", { "data-metric": "tau", "data-raw": rawAttr(metrics.tau) }, fmtMetric(metrics.tau)),
  );
  panel.appendChild(statusLine);

  renderCheckpoints(panel, metrics);
  renderSelection(panel, metrics);
}
