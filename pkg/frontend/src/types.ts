// Mirrors of the session service's JSON payloads. The UI renders these
// verbatim; it never derives numbers of its own.

export type DatasetKind = "text" | "tabular";

export interface QueryPayload {
  query_token: string;
  instance_id: number;
  kind: DatasetKind;
  iteration: number;
  budget: number;
  text?: string;
  tokens?: string[];
  features?: number[];
  feature_names?: string[];
}

export interface CheckpointView {
  iteration: number;
  test_acc: number;
  label_acc: number | null;
  coverage: number;
  n_lfs_selected: number;
  tau: number;
  flagged: boolean;
}

export interface LfRow {
  lf_id: number;
  lf: string;
  activated: number;
  accuracy: number | null;
  kept: boolean;
}

export interface SelectionView {
  status: string;
  accuracies: LfRow[];
  survivor_ids: number[];
  selected_ids: number[];
}

export type SessionStatus = "awaiting_lf" | "finished";

export interface MetricsPayload {
  status: SessionStatus;
  iteration: number;
  budget: number;
  n_lfs: number;
  tau: number;
  checkpoints: CheckpointView[];
  selection: SelectionView | null;
}

export interface SessionCreated {
  session_id: number;
  status: SessionStatus;
  query: QueryPayload | null;
}

export interface QueryResponse {
  status: SessionStatus;
  query: QueryPayload | null;
}

export interface SubmitResponse {
  accepted: boolean;
  metrics: MetricsPayload;
  query: QueryPayload | null;
}

export interface KeywordLfSpec {
  kind: "keyword";
  word: string;
  target: 0 | 1;
}

export interface StumpLfSpec {
  kind: "stump";
  feature: number;
  value: number;
  op: "<=" | ">=";
  target: 0 | 1;
}

export type LfSpec = KeywordLfSpec | StumpLfSpec;

export interface SessionRequest {
  dataset: string;
  seed?: number;
  mode?: string;
  budget?: number;
  eval_every?: number;
  synth_n?: number;
  [key: string]: string | number | boolean | undefined;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
