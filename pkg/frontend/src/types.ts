/** Wire types mirroring the review service JSON, field for field. */

export type Verdict = "confirmed_misinformation" | "confirmed_propaganda" | "rejected";

export interface HealthInfo {
  status: string;
  months: string[];
  runs: number;
  labels: Record<string, number>;
}

export interface RunInfo {
  run_id: string;
  created_at: string;
  strategy: string;
  target_class: string;
  months: string[];
  n_candidates: number;
  n_positives: number;
  n_reviewed: number;
}

export interface ReviewInfo {
  verdict: string;
  reviewer: string;
  timestamp: string;
}

export interface QueueItem {
  domain: string;
  confidences: Record<string, number>;
  min_confidence: number;
  predicted_class: string;
  review: ReviewInfo | null;
}

export interface QueuePage {
  run_id: string;
  page: number;
  size: number;
  total: number;
  items: QueueItem[];
}

export interface MonthView {
  features: Record<string, number>;
  inbound_total: number;
  outbound_total: number;
}

export interface NeighborRow {
  domain: string;
  label_class: string;
  in_weights: Record<string, number>;
  out_weights: Record<string, number>;
  total_weight: number;
}

export interface DomainLabelInfo {
  class: string;
  propaganda: boolean;
  source: string;
}

export interface DomainView {
  domain: string;
  label: DomainLabelInfo | null;
  review: ReviewInfo | null;
  months: Record<string, MonthView>;
  neighbors: NeighborRow[];
}

export interface ReviewRequest {
  run_id: string;
  domain: string;
  verdict: Verdict;
  reviewer: string;
  checklist?: boolean[];
}
