import { ApiClient, ApiError } from "./api.js";
import type { LfSpec, MetricsPayload, QueryPayload, SessionRequest } from "./types.js";
import { renderQueryPanel, type QueryPanelHandle } from "./queryPanel.js";
import { renderMetricsPanel } from "./metricsPanel.js";

export interface AppElements {
  query: HTMLElement;
  metrics: HTMLElement;
  export: HTMLElement;
}

/** Wires the panels to the service. All state lives server-side; the
 * app only keeps the session id and the current query token. One
 * request in flight at a time; submit stays disabled until the
 * response lands. */
export class LabelApp {
  readonly client: ApiClient;
  private readonly els: AppElements;
  private sessionId: number | null = null;
  private query: QueryPayload | null = null;
  private panel: QueryPanelHandle | null = null;
  private busy = false;

  constructor(client: ApiClient, els: AppElements) {
    this.client = client;
    this.els = els;
  }

  get currentQuery(): QueryPayload | null {
    return this.query;
  }

  get id(): number {
    if (this.sessionId === null) throw new Error("session not started");
    return this.sessionId;
  }

  async start(req: SessionRequest): Promise<void> {
    const created = await this.client.createSession(req);
    this.sessionId = created.session_id;
    this.query = created.query;
    this.renderQuery();
    const metrics = await this.client.getMetrics(created.session_id);
    this.renderMetrics(metrics);
  }

  private renderQuery(): void {
    this.panel = renderQueryPanel(this.els.query, this.query, {
      onSubmit: (lf) => void this.submit(lf),
      onSkip: () => void this.skip(),
    });
    if (this.query === null) this.renderExportControls();
  }

  private renderMetrics(metrics: MetricsPayload): void {
    renderMetricsPanel(this.els.metrics, metrics);
  }

  private renderExportControls(): void {
    this.els.export.textContent = "";
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.role = "export";
    button.textContent = "show exported labels";
    const pre = document.createElement("pre");
    pre.dataset.role = "export-text";
    pre.hidden = true;
    button.addEventListener("click", () => {
      void this.client.exportLabels(this.id).then((text) => {
        pre.textContent = text;
        pre.hidden = false;
      });
    });
    this.els.export.append(button, pre);
  }

  /** Submit the authored rule for the current query. */
  async submit(lf: LfSpec): Promise<void> {
    await this.send(() => this.client.submitLf(this.id, this.mustToken(), lf));
  }

  async skip(): Promise<void> {
    await this.send(() => this.client.skip(this.id, this.mustToken()));
  }

  private mustToken(): string {
    if (!this.query) throw new Error("no outstanding query");
    return this.query.query_token;
  }

  private async send(
    call: () => Promise<{ metrics: MetricsPayload; query: QueryPayload | null }>,
  ): Promise<void> {
    if (this.busy || !this.panel) return;
    this.busy = true;
    this.panel.setBusy(true);
    this.panel.clearError();
    try {
      const resp = await call();
      this.query = resp.query;
      this.renderQuery();
      this.renderMetrics(resp.metrics);
    } catch (err) {
      if (err instanceof ApiError) {
        // surface the service message verbatim next to the form
        this.panel.showError(err.message);
      } else {
        this.panel.showError(String(err));
      }
      this.panel.setBusy(false);
    } finally {
      this.busy = false;
    }
  }
}
