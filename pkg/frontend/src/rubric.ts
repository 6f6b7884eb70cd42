import type { Verdict } from "./types.js";

/** The five-row review rubric. Confirming requires at least three rows
 * marked; rejecting needs none. The rubric is a client-side affordance,
 * the service stores the checklist for audit but enforces only verdict
 * validity. */
export const CHECKLIST: readonly string[] = [
  "Presents rumors or unverified claims as confirmed fact",
  "No identifiable author, editor, or ownership",
  "Emotionally loaded framing aimed at outrage",
  "Recycles story text seen on other flagged sites",
  "Published falsehoods with no correction or retraction",
];

export const CONFIRM_THRESHOLD = 3;

export function checkedCount(checklist: readonly boolean[]): number {
  return checklist.reduce((n, marked) => n + (marked ? 1 : 0), 0);
}

export function isConfirmVerdict(verdict: Verdict): boolean {
  return verdict === "confirmed_misinformation" || verdict === "confirmed_propaganda";
}

export function canSubmit(verdict: Verdict, checklist: readonly boolean[]): boolean {
  if (!isConfirmVerdict(verdict)) {
    return true;
  }
  return checkedCount(checklist) >= CONFIRM_THRESHOLD;
}
