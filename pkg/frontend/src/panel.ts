import type { DomainView, NeighborRow } from "./types.js";

/** Display helpers for the domain evidence panel. The panel shows numbers
 * exactly as the service served them; these helpers only select and decorate,
 * they never recompute. */

export interface ShareBar {
  name: string;
  value: number;
  widthPct: number;
}

export function shareBars(features: Record<string, number>): ShareBar[] {
  return Object.entries(features)
    .filter(([name]) => name.startsWith("to_") || name.startsWith("from_"))
    .map(([name, value]) => ({
      name,
      value,
      widthPct: Math.max(0, Math.min(1, value)) * 100,
    }));
}

export function egonetCounts(features: Record<string, number>): {
  inbound: number;
  outbound: number;
} {
  return {
    inbound: features["inbound_egonets"] ?? 0,
    outbound: features["outbound_egonets"] ?? 0,
  };
}

export const LABEL_CLASS_NAMES = [
  "propaganda",
  "misinformation",
  "authoritative",
  "unlabeled",
] as const;

export function labelColorClass(labelClass: string): string {
  return (LABEL_CLASS_NAMES as readonly string[]).includes(labelClass)
    ? `label-${labelClass}`
    : "label-unlabeled";
}

/** Render a served number without reformatting. */
export function rawNumber(value: number): string {
  return String(value);
}

export function sortedMonths(view: DomainView): string[] {
  return Object.keys(view.months).sort();
}

export function neighborTitle(row: NeighborRow): string {
  return `${row.domain} (${row.label_class}, weight ${row.total_weight})`;
}
