import { ApiClient } from "./api.js";
import { LabelApp } from "./app.js";

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function boot(): void {
  const form = must<HTMLFormElement>("session-form");
  const status = must<HTMLElement>("session-status");
  const app = new LabelApp(new ApiClient(""), {
    query: must("query-panel"),
    metrics: must("metrics-panel"),
    export: must("export-panel"),
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const dataset = String(data.get("dataset") || "synth:text");
    const seed = Number(data.get("seed") || 0);
    const budget = Number(data.get("budget") || 30);
    status.textContent = "starting session...";
    app
      .start({ dataset, seed, budget, eval_every: 10 })
      .then(() => {
        status.textContent = `session ${app.id} running`;
      })
      .catch((err) => {
        status.textContent = `could not start: ${err instanceof Error ? err.message : err}`;
      });
  });
}

document.addEventListener("DOMContentLoaded", boot);
