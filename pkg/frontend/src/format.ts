// Display formatting only. Raw service values always travel alongside
// the formatted text (data-raw attributes) so every rendered number is
// traceable to a response field.

export function fmtMetric(value: number | null, digits = 4): string {
  if (value === null || Number.isNaN(value)) return "n/a";
  return value.toFixed(digits);
}

export function fmtCount(value: number): string {
  return String(value);
}

/** The exact JSON scalar as a string, for data-raw attributes. */
export function rawAttr(value: number | string | boolean | null): string {
  return value === null ? "null" : String(value);
}

export function fmtProgress(iteration: number, budget: number): string {
  return `${iteration} / ${budget}`;
}
