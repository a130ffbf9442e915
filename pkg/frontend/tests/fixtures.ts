import type { MetricsPayload, QueryPayload } from "../src/types.js";

export function textQuery(overrides: Partial<QueryPayload> = {}): QueryPayload {
  return {
    query_token: "q1",
    instance_id: 7,
    kind: "text",
    iteration: 1,
    budget: 10,
    text: "check out my channel",
    tokens: ["check", "out", "my", "channel"],
    ...overrides,
  };
}

export function tabularQuery(overrides: Partial<QueryPayload> = {}): QueryPayload {
  return {
    query_token: "q1",
    instance_id: 3,
    kind: "tabular",
    iteration: 1,
    budget: 10,
    features: [1.25, -0.5],
    feature_names: ["f0", "f1"],
    ...overrides,
  };
}

export function emptyMetrics(overrides: Partial<MetricsPayload> = {}): MetricsPayload {
  return {
    status: "awaiting_lf",
    iteration: 0,
    budget: 10,
    n_lfs: 0,
    tau: 1.0,
    checkpoints: [],
    selection: null,
    ...overrides,
  };
}

export function richMetrics(): MetricsPayload {
  return {
    status: "awaiting_lf",
    iteration: 20,
    budget: 30,
    n_lfs: 4,
    tau: 0.6169897176553307,
    checkpoints: [
      {
        iteration: 10,
        test_acc: 0.875,
        label_acc: null,
        coverage: 0.0,
        n_lfs_selected: 0,
        tau: 1.0,
        flagged: true,
      },
      {
        iteration: 20,
        test_acc: 0.925,
        label_acc: 0.9025974025974026,
        coverage: 0.9625,
        n_lfs_selected: 3,
        tau: 0.6169897176553307,
        flagged: false,
      },
    ],
    selection: {
      status: "blanket",
      accuracies: [
        { lf_id: 0, lf: '"spam" -> 1', activated: 12, accuracy: 0.9166666666666666, kept: true },
        { lf_id: 1, lf: '"the" -> 1', activated: 40, accuracy: 0.35, kept: false },
        { lf_id: 2, lf: '"meeting" -> 0', activated: 9, accuracy: 1.0, kept: true },
        { lf_id: 3, lf: '"never" -> 0', activated: 0, accuracy: null, kept: false },
      ],
      survivor_ids: [0, 2],
      selected_ids: [0],
    },
  };
}
