import type { LfSpec, QueryPayload } from "./types.js";
import { fmtProgress } from "./format.js";

export interface QueryPanelHandlers {
  onSubmit: (lf: LfSpec) => void;
  onSkip: () => void;
}

export interface QueryPanelHandle {
  /** Inline error area, used verbatim for service rejections. */
  showError: (message: string) => void;
  clearError: () => void;
  /** Disable inputs while a request is in flight. */
  setBusy: (busy: boolean) => void;
}

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

function classSelector(): HTMLSelectElement {
  const select = el("select", { "data-role": "target" });
  select.append(new Option("class 0", "0"), new Option("class 1", "1"));
  select.value = "1";
  return select;
}

function renderTextForm(
  panel: HTMLElement,
  query: QueryPayload,
  handlers: QueryPanelHandlers,
  showValidation: (msg: string) => void,
): void {
  const tokens = query.tokens ?? [];
  const strip = el("div", { class: "tokens", "data-role": "tokens" });
  const keyword = el("input", {
    type: "text",
    "data-role": "keyword",
    placeholder: "keyword (click a token to prefill)",
  });
  for (const token of tokens) {
    const chip = el("button", { type: "button", class: "token", "data-token": token }, token);
    chip.addEventListener("click", () => {
      keyword.value = token;
    });
    strip.appendChild(chip);
  }
  panel.appendChild(strip);

  const target = classSelector();
  const row = el("div", { class: "lf-form" });
  row.append(el("label", {}, "rule: keyword"), keyword, target);
  panel.appendChild(row);

  const submit = el("button", { type: "button", "data-role": "submit" }, "submit rule");
  submit.addEventListener("click", () => {
    const word = keyword.value.trim();
    if (!word) {
      showValidation("enter a keyword or click one of the query's tokens");
      return;
    }
    handlers.onSubmit({
      kind: "keyword",
      word,
      target: Number(target.value) === 1 ? 1 : 0,
    });
  });
  panel.appendChild(submit);
}

function renderTabularForm(
  panel: HTMLElement,
  query: QueryPayload,
  handlers: QueryPanelHandlers,
  showValidation: (msg: string) => void,
): void {
  const names = query.feature_names ?? [];
  const values = query.features ?? [];
  const table = el("table", { class: "features", "data-role": "features" });
  const head = el("tr");
  for (const h of ["use", "feature", "query value", "op", "threshold"]) {
    head.appendChild(el("th", {}, h));
  }
  table.appendChild(head);

  const rows: Array<{ radio: HTMLInputElement; op: HTMLSelectElement; value: HTMLInputElement }> =
    [];
  names.forEach((name, i) => {
    const tr = el("tr", { "data-feature": String(i) });
    const radio = el("input", { type: "radio", name: "feature", value: String(i) });
    if (i === 0) radio.checked = true;
    const op = el("select", { "data-role": `op-${i}` });
    op.append(new Option("<=", "<="), new Option(">=", ">="));
    const value = el("input", {
      type: "text",
      "data-role": `value-${i}`,
      value: String(values[i] ?? ""),
    });
    const cells = [radio, el("span", {}, name), el("span", {}, String(values[i] ?? "")), op, value];
    for (const cell of cells) {
      const td = el("td");
      td.appendChild(cell);
      tr.appendChild(td);
    }
    table.appendChild(tr);
    rows.push({ radio, op, value });
  });
  panel.appendChild(table);

  const target = classSelector();
  const row = el("div", { class: "lf-form" });
  row.append(el("label", {}, "stump labels"), target);
  panel.appendChild(row);

  const submit = el("button", { type: "button", "data-role": "submit" }, "submit rule");
  submit.addEventListener("click", () => {
    const pick = rows.findIndex((r) => r.radio.checked);
    if (pick < 0) {
      showValidation("pick a feature for the stump");
      return;
    }
    const chosen = rows[pick];
    if (!chosen) return;
    const threshold = Number(chosen.value.value);
    if (!Number.isFinite(threshold)) {
      showValidation("threshold must be a number");
      return;
    }
    handlers.onSubmit({
      kind: "stump",
      feature: pick,
      value: threshold,
      op: chosen.op.value === ">=" ? ">=" : "<=",
      target: Number(target.value) === 1 ? 1 : 0,
    });
  });
  panel.appendChild(submit);
}

/** Render the current query and the rule-authoring form into `container`. */
export function renderQueryPanel(
  container: HTMLElement,
  query: QueryPayload | null,
  handlers: QueryPanelHandlers,
): QueryPanelHandle {
  container.textContent = "";
  const panel = el("section", { class: "query-panel" });
  container.appendChild(panel);

  const error = el("p", { class: "inline-error", "data-role": "error", hidden: "" });
  const showError = (message: string) => {
    error.textContent = message;
    error.removeAttribute("hidden");
  };
  const clearError = () => {
    error.textContent = "";
    error.setAttribute("hidden", "");
  };

  if (query === null) {
    panel.appendChild(el("h2", {}, "Session finished"));
    panel.appendChild(
      el("p", { "data-role": "finished" }, "Budget exhausted. Export the labels below."),
    );
    panel.appendChild(error);
    return { showError, clearError, setBusy: () => {} };
  }

  panel.appendChild(el("h2", {}, "Current query"));
  panel.appendChild(
    el(
      "p",
      { class: "progress", "data-role": "progress" },
      `query ${fmtProgress(query.iteration, query.budget)} (instance ${query.instance_id})`,
    ),
  );
  if (query.kind === "text") {
    panel.appendChild(el("blockquote", { "data-role": "text" }, query.text ?? ""));
  }

  const showValidation = (msg: string) => showError(msg);
  if (query.kind === "text") renderTextForm(panel, query, handlers, showValidation);
  else renderTabularForm(panel, query, handlers, showValidation);

  const skip = el("button", { type: "button", "data-role": "skip" }, "skip");
  skip.addEventListener("click", () => handlers.onSkip());
  panel.appendChild(skip);
  panel.appendChild(error);

  const setBusy = (busy: boolean) => {
    for (const btn of panel.querySelectorAll("button")) {
      (btn as HTMLButtonElement).disabled = busy;
    }
  };
  return { showError, clearError, setBusy };
}
