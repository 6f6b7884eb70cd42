import type { Verdict } from "./types.js";

/** A verdict that could not reach the service is parked here so it is never
 * silently lost; the form restores it the next time the domain is opened. */
export interface Draft {
  runId: string;
  domain: string;
  verdict: Verdict;
  checklist: boolean[];
  savedAt: string;
}

/** The subset of the Web Storage API the draft store needs; injectable so
 * tests run without a browser. */
export interface KVStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class DraftStore {
  constructor(
    private readonly kv: KVStore,
    private readonly prefix = "navsift.draft.",
  ) {}

  private key(runId: string, domain: string): string {
    return `${this.prefix}${runId}:${domain}`;
  }

  save(draft: Draft): void {
    this.kv.setItem(this.key(draft.runId, draft.domain), JSON.stringify(draft));
  }

  load(runId: string, domain: string): Draft | null {
    const raw = this.kv.getItem(this.key(runId, domain));
    if (raw === null) {
      return null;
    }
    try {
      return JSON.parse(raw) as Draft;
    } catch {
      return null;
    }
  }

  clear(runId: string, domain: string): void {
    this.kv.removeItem(this.key(runId, domain));
  }
}
