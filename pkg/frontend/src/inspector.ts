/**
 * Row builders for the inspector panel. Everything shown comes straight from
 * the server's debug block; no values are derived client-side.
 */

import type { DebugBlock } from "./api.js";

export interface Row {
  label: string;
  value: string;
}

export function variableRows(debug: DebugBlock): Row[] {
  return Object.keys(debug.variables)
    .sort()
    .map((name) => ({ label: name, value: formatValue(debug.variables[name]) }));
}

export function formatValue(value: string | number | boolean): string {
  if (typeof value === "boolean") {
    return value ? "true" : "false";
  }
  return String(value);
}

/** Stack rows exactly as served: top entry first. */
export function stackRows(debug: DebugBlock): Row[] {
  return debug.stack.map((entry, index) => ({
    label: index === 0 ? "top" : `#${index + 1}`,
    value: `${entry.state} (life ${entry.life})`,
  }));
}

export function featureRows(debug: DebugBlock): Row[] {
  const rows: Row[] = [];
  const features = debug.features;
  if (features.sentiment !== null && features.sentiment !== undefined) {
    rows.push({ label: "sentiment", value: features.sentiment.toFixed(3) });
  }
  rows.push({ label: "topic", value: argmax(features.topic_dist) });
  rows.push({ label: "intent", value: argmax(features.intent_dist) });
  if (features.entities.length > 0) {
    rows.push({
      label: "entities",
      value: features.entities.map((m) => `${m.surface} [${m.entity_type}]`).join(", "),
    });
  }
  if (features.qa_answer) {
    rows.push({ label: "qa", value: features.qa_answer });
  }
  rows.push({ label: "state", value: debug.state });
  rows.push({ label: "components", value: debug.components.join(", ") || "-" });
  return rows;
}

function argmax(dist: Record<string, number> | null): string {
  if (!dist) {
    return "-";
  }
  const labels = Object.keys(dist).sort();
  if (labels.length === 0) {
    return "-";
  }
  let best = labels[0];
  for (const label of labels) {
    if (dist[label] > dist[best]) {
      best = label;
    }
  }
  return `${best} (${dist[best].toFixed(2)})`;
}
