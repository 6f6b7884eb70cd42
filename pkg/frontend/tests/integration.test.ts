// End-to-end: build artifacts with the pipeline CLI, run the real HTTP
// service, and drive it through the same client the UI uses. Asserts the
// one-event-per-verdict invariant on the label log and the candidate-set
// growth after a confirmed review feeds back into deployment.
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { walkAll } from "../src/queue.js";
import type { QueueItem } from "../src/types.js";

const PORT = 8500 + (process.pid % 400);
const BASE = `http://127.0.0.1:${PORT}`;

const SYNTH_CONFIG = {
  config_version: 1,
  n_misinformation: 30,
  n_propaganda: 5,
  n_authoritative: 100,
  n_unlabeled_misinfo: 10,
  n_benign_unlabeled: 300,
  months: 2,
  seed: 3,
};

let work: string;
let root: string;
let server: ChildProcess | null = null;
let serverExited: Promise<void> | null = null;
const client = new ApiClient(BASE);

function cli(...args: string[]): string {
  return execFileSync("python3", ["-m", "navsift.app.cli", ...args], {
    encoding: "utf-8",
    stdio: ["ignore", "pipe", "pipe"],
  });
}

function deployArgs(runId: string, labels: string, createdAt: string): string[] {
  return [
    "deploy",
    "--graphs", join(root, "graphs"),
    "--labels", labels,
    "--model", join(root, "model.json"),
    "--strategy", "one-hop",
    "--run-id", runId,
    "--created-at", createdAt,
    "--out", join(root, "runs"),
  ];
}

function eventLines(path: string): string[] {
  if (!existsSync(path)) return [];
  return readFileSync(path, "utf-8").split("\n").filter((line) => line.trim() !== "");
}

function candidateDomains(runId: string): string[] {
  const lines = readFileSync(join(root, "runs", runId, "candidates.csv"), "utf-8")
    .split("\n")
    .filter((line) => line.trim() !== "");
  return lines.slice(1).map((line) => line.split(",")[0]);
}

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 80; i++) {
    try {
      const health = await client.health();
      if (health.status === "ok") return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service never became healthy");
}

async function stopServer(): Promise<void> {
  if (server && server.exitCode === null) {
    server.kill("SIGTERM");
    await Promise.race([
      serverExited,
      new Promise((resolve) => setTimeout(resolve, 5000)),
    ]);
    if (server.exitCode === null) server.kill("SIGKILL");
  }
  server = null;
}

beforeAll(async () => {
  work = mkdtempSync(join(tmpdir(), "navsift-ui-"));
  root = join(work, "root");
  writeFileSync(join(work, "config.json"), JSON.stringify(SYNTH_CONFIG));

  cli("synth", "--config", join(work, "config.json"), "--out", root);
  cli("ingest", "--logs", join(root, "logs.csv"), "--out", join(root, "records.csv"));
  cli("build-graph", "--records", join(root, "records.csv"), "--out", join(root, "graphs"));
  cli(
    "train",
    "--graphs", join(root, "graphs"),
    "--labels", join(root, "labels.csv"),
    "--train-month", "2022-10",
    "--algorithm", "random_forest",
    "--rf-trees", "30",
    "--out", join(root, "model.json"),
  );
  cli(...deployArgs("run-a", join(root, "labels.csv"), "2023-01-01T00:00:00Z"));

  server = spawn(
    "python3",
    ["-m", "navsift.app.cli", "serve", "--root", root, "--port", String(PORT)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  serverExited = new Promise((resolve) => server!.once("exit", () => resolve()));
  await waitForHealth();
});

afterAll(async () => {
  await stopServer();
  rmSync(work, { recursive: true, force: true });
});

describe("review service round trip", () => {
  let firstItem: QueueItem;

  it("reports the runs it loaded", async () => {
    const health = await client.health();
    expect(health.months).toEqual(["2022-10", "2022-11"]);
    const runs = await client.runs();
    expect(runs).toHaveLength(1);
    expect(runs[0].run_id).toBe("run-a");
    expect(runs[0].n_positives).toBeGreaterThanOrEqual(3);
    expect(runs[0].n_reviewed).toBe(0);
  });

  it("pages the queue without skips or duplicates, highest confidence first", async () => {
    const all = await walkAll((page) => client.queue("run-a", page, 3));
    const runs = await client.runs();
    expect(all).toHaveLength(runs[0].n_positives);
    for (let i = 1; i < all.length; i++) {
      const prev = all[i - 1];
      const cur = all[i];
      const ordered =
        prev.min_confidence > cur.min_confidence ||
        (prev.min_confidence === cur.min_confidence && prev.domain < cur.domain);
      expect(ordered).toBe(true);
    }
    firstItem = all[0];
    expect(firstItem.review).toBeNull();
  });

  it("serves the evidence panel data for a flagged domain", async () => {
    const view = await client.domain(firstItem.domain);
    expect(Object.keys(view.months).sort()).toEqual(["2022-10", "2022-11"]);
    const features = view.months["2022-10"].features;
    expect(features).toHaveProperty("to_misinformation");
    expect(features).toHaveProperty("from_propaganda");
    for (const row of view.neighbors) {
      expect(["propaganda", "misinformation", "authoritative", "unlabeled"]).toContain(
        row.label_class,
      );
      expect(row.total_weight).toBeGreaterThan(0);
    }
    const missing = await client.domain("ghost.example").catch((e: unknown) => e);
    expect((missing as ApiError).status).toBe(404);
    expect((missing as ApiError).code).toBe("domain_not_found");
  });

  it("records exactly one label-log event per submitted verdict", async () => {
    const item = await client.postReview({
      run_id: "run-a",
      domain: firstItem.domain,
      verdict: "confirmed_misinformation",
      reviewer: "it-analyst",
      checklist: [true, true, true, false, false],
    });
    expect(item.review?.verdict).toBe("confirmed_misinformation");
    expect(eventLines(join(root, "labels", "events.jsonl"))).toHaveLength(1);
    expect(eventLines(join(root, "runs", "run-a", "reviews.jsonl"))).toHaveLength(1);

    // read-through: the queue now shows the verdict and the run counts it
    const page = await client.queue("run-a", 1, 3);
    const refreshed = page.items.find((i) => i.domain === firstItem.domain)!;
    expect(refreshed.review?.verdict).toBe("confirmed_misinformation");
    expect(refreshed.min_confidence).toBe(firstItem.min_confidence);
    const runs = await client.runs();
    expect(runs[0].n_reviewed).toBe(1);
  });

  it("rejects a conflicting verdict with 409 and writes nothing", async () => {
    const err = (await client
      .postReview({
        run_id: "run-a",
        domain: firstItem.domain,
        verdict: "rejected",
        reviewer: "someone-else",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(409);
    expect(err.code).toBe("verdict_conflict");
    expect(eventLines(join(root, "labels", "events.jsonl"))).toHaveLength(1);

    // the same verdict from a second reviewer is an audit append, not a conflict
    const again = await client.postReview({
      run_id: "run-a",
      domain: firstItem.domain,
      verdict: "confirmed_misinformation",
      reviewer: "second-reviewer",
      checklist: [true, true, true, true, false],
    });
    expect(again.review?.verdict).toBe("confirmed_misinformation");
    expect(eventLines(join(root, "labels", "events.jsonl"))).toHaveLength(2);
    const runs = await client.runs();
    expect(runs[0].n_reviewed).toBe(1);
  });

  it("returns structured errors for invalid reviews", async () => {
    const badVerdict = (await client
      .postReview({
        run_id: "run-a",
        domain: firstItem.domain,
        verdict: "maybe" as never,
        reviewer: "x",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect([badVerdict.status, badVerdict.code]).toEqual([400, "invalid_verdict"]);

    const blankReviewer = (await client
      .postReview({
        run_id: "run-a",
        domain: firstItem.domain,
        verdict: "rejected",
        reviewer: "   ",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect([blankReviewer.status, blankReviewer.code]).toEqual([400, "invalid_reviewer"]);

    const notFlagged = (await client
      .postReview({
        run_id: "run-a",
        domain: "site0000.example",
        verdict: "rejected",
        reviewer: "x",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect([notFlagged.status, notFlagged.code]).toEqual([404, "domain_not_flagged"]);

    const noRun = (await client
      .postReview({
        run_id: "run-zzz",
        domain: firstItem.domain,
        verdict: "rejected",
        reviewer: "x",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect([noRun.status, noRun.code]).toEqual([404, "run_not_found"]);

    const missingField = await fetch(`${BASE}/reviews`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ run_id: "run-a", domain: firstItem.domain, reviewer: "x" }),
    });
    expect(missingField.status).toBe(400);
    const body = (await missingField.json()) as { code: string };
    expect(body.code).toBe("invalid_request");
  });

  it("feeds confirmed labels back into the next deployment's candidates", async () => {
    await stopServer();

    // redeploy from the event-sourced store the service wrote
    cli(...deployArgs("run-b", join(root, "labels"), "2023-01-02T00:00:00Z"));

    const before = candidateDomains("run-a");
    const after = candidateDomains("run-b");
    expect(before).toContain(firstItem.domain);
    expect(after).not.toContain(firstItem.domain);

    const afterSet = new Set(after);
    for (const domain of before) {
      if (domain !== firstItem.domain) {
        expect(afterSet.has(domain)).toBe(true);
      }
    }
    // the confirmed domain's egonet pulls in domains no seed reached before
    const beforeSet = new Set(before);
    const added = after.filter((d) => !beforeSet.has(d));
    expect(added.length).toBeGreaterThan(0);
    expect(after.length).toBeGreaterThan(before.length);
  });
});
