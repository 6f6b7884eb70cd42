// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, type ReviewApi } from "../src/api.js";
import { createApp } from "../src/app.js";
import type { KVStore } from "../src/drafts.js";
import type {
  DomainView,
  QueueItem,
  QueuePage,
  ReviewRequest,
  RunInfo,
} from "../src/types.js";

class MemKV implements KVStore {
  map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

function runInfo(n_reviewed = 0): RunInfo {
  return {
    run_id: "run-1",
    created_at: "2023-01-01T00:00:00Z",
    strategy: "one_hop_egonet",
    target_class: "misinformation",
    months: ["2022-10", "2022-11"],
    n_candidates: 40,
    n_positives: 3,
    n_reviewed,
  };
}

function queueItem(domain: string, conf: number, review: QueueItem["review"] = null): QueueItem {
  return {
    domain,
    confidences: { "2022-10": conf, "2022-11": conf },
    min_confidence: conf,
    predicted_class: "misinformation",
    review,
  };
}

function domainView(domain: string): DomainView {
  return {
    domain,
    label: null,
    review: null,
    months: {
      "2022-10": {
        features: {
          inbound_traffic_log: 3.0,
          to_misinformation: 0.75,
          from_misinformation: 0.5,
          to_google: 0,
          inbound_egonets: 2,
          outbound_egonets: 1,
        },
        inbound_total: 8000,
        outbound_total: 4000,
      },
      "2022-11": {
        features: {
          inbound_traffic_log: 3.1,
          to_misinformation: 0.8,
          from_misinformation: 0.4,
          to_google: 0,
          inbound_egonets: 2,
          outbound_egonets: 1,
        },
        inbound_total: 9000,
        outbound_total: 4100,
      },
    },
    neighbors: [
      {
        domain: "red.example",
        label_class: "propaganda",
        in_weights: { "2022-10": 5000 },
        out_weights: {},
        total_weight: 5000,
      },
      {
        domain: "gray.example",
        label_class: "unlabeled",
        in_weights: {},
        out_weights: { "2022-10": 3100 },
        total_weight: 3100,
      },
    ],
  };
}

class FakeApi implements ReviewApi {
  items: QueueItem[] = [queueItem("p1.example", 0.99), queueItem("p2.example", 0.8), queueItem("p3.example", 0.7)];
  reviewedCount = 0;
  posted: ReviewRequest[] = [];
  postFailure: "network" | "conflict" | null = null;

  async health() {
    return { status: "ok", months: ["2022-10", "2022-11"], runs: 1, labels: {} };
  }

  async runs(): Promise<RunInfo[]> {
    return [runInfo(this.reviewedCount)];
  }

  async queue(runId: string, page = 1, size = 20): Promise<QueuePage> {
    const start = (page - 1) * size;
    return {
      run_id: runId,
      page,
      size,
      total: this.items.length,
      items: this.items.slice(start, start + size),
    };
  }

  async domain(name: string): Promise<DomainView> {
    if (!this.items.some((i) => i.domain === name)) {
      throw new ApiError(404, "domain_not_found", `${name} has no traffic in any month`);
    }
    const view = domainView(name);
    const item = this.items.find((i) => i.domain === name)!;
    return { ...view, review: item.review };
  }

  async postReview(req: ReviewRequest): Promise<QueueItem> {
    if (this.postFailure === "network") {
      throw new ApiError(0, "network", "fetch failed");
    }
    if (this.postFailure === "conflict") {
      throw new ApiError(409, "verdict_conflict", "already reviewed as 'rejected'");
    }
    this.posted.push(req);
    this.reviewedCount += 1;
    const review = { verdict: req.verdict, reviewer: req.reviewer, timestamp: "t" };
    this.items = this.items.map((i) => (i.domain === req.domain ? { ...i, review } : i));
    return this.items.find((i) => i.domain === req.domain)!;
  }
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.appendChild(root);
});

function text(selector: string): string {
  return root.querySelector(selector)?.textContent ?? "";
}

describe("queue rendering", () => {
  it("renders served items in order with raw confidences", async () => {
    const app = createApp(new FakeApi(), root, new MemKV());
    await app.init();
    const domains = [...root.querySelectorAll(".queue-domain")].map((n) => n.textContent);
    expect(domains).toEqual(["p1.example", "p2.example", "p3.example"]);
    expect(text(".queue-item .queue-confidence")).toBe("0.99");
  });

  it("shows the explicit empty state", async () => {
    const api = new FakeApi();
    api.items = [];
    const app = createApp(api, root, new MemKV());
    await app.init();
    expect(text(".queue-empty")).toBe("No flagged domains");
  });

  it("pages with prev disabled on the first page", async () => {
    const app = createApp(new FakeApi(), root, new MemKV(), { pageSize: 2 });
    await app.init();
    expect(text(".pager-label")).toBe("page 1 of 2");
    expect((root.querySelector(".pager-prev") as HTMLButtonElement).disabled).toBe(true);
    await app.gotoPage(2);
    expect(text(".pager-label")).toBe("page 2 of 2");
    expect((root.querySelector(".pager-next") as HTMLButtonElement).disabled).toBe(true);
    const domains = [...root.querySelectorAll(".queue-domain")].map((n) => n.textContent);
    expect(domains).toEqual(["p3.example"]);
  });
});

describe("domain panel", () => {
  it("renders share bars and color-coded neighbors", async () => {
    const app = createApp(new FakeApi(), root, new MemKV());
    await app.init();
    await app.selectDomain("p1.example");
    expect(text(".domain-title")).toBe("p1.example");
    const row = root.querySelector('.bar-row[data-feature="to_misinformation"]')!;
    // latest month selected by default
    expect(row.querySelector(".bar-value")!.textContent).toBe("0.8");
    const dots = [...root.querySelectorAll(".neighbor-row .label-dot")];
    expect(dots[0].classList.contains("label-propaganda")).toBe(true);
    expect(dots[1].classList.contains("label-unlabeled")).toBe(true);
    app.setMonth("2022-10");
    expect(
      root
        .querySelector('.bar-row[data-feature="to_misinformation"] .bar-value')!
        .textContent,
    ).toBe("0.75");
  });

  it("shows a not-found state for unknown domains", async () => {
    const app = createApp(new FakeApi(), root, new MemKV());
    await app.init();
    await app.selectDomain("ghost.example");
    expect(text(".panel-notfound")).toContain("ghost.example");
  });
});

describe("verdict form gating", () => {
  async function appWithDomain(api = new FakeApi(), kv: KVStore = new MemKV()) {
    const app = createApp(api, root, kv);
    await app.init();
    await app.selectDomain("p1.example");
    return app;
  }

  function button(cls: string): HTMLButtonElement {
    return root.querySelector(`.${cls}`) as HTMLButtonElement;
  }

  it("disables everything while the reviewer is blank", async () => {
    const app = await appWithDomain();
    app.setCheck(0, true);
    app.setCheck(1, true);
    app.setCheck(2, true);
    expect(button("confirm-mis").disabled).toBe(true);
    expect(button("reject").disabled).toBe(true);
    app.setReviewer("ana");
    expect(button("reject").disabled).toBe(false);
  });

  it("enables confirm only at three checklist marks", async () => {
    const app = await appWithDomain();
    app.setReviewer("ana");
    app.setCheck(0, true);
    app.setCheck(1, true);
    expect(button("confirm-mis").disabled).toBe(true);
    expect(button("confirm-prop").disabled).toBe(true);
    expect(button("reject").disabled).toBe(false);
    app.setCheck(4, true);
    expect(button("confirm-mis").disabled).toBe(false);
    expect(button("confirm-prop").disabled).toBe(false);
  });

  it("submits and marks the item reviewed", async () => {
    const api = new FakeApi();
    const app = await appWithDomain(api);
    app.setReviewer("ana");
    app.setCheck(0, true);
    app.setCheck(1, true);
    app.setCheck(2, true);
    await app.submit("confirmed_misinformation");
    expect(api.posted).toHaveLength(1);
    expect(api.posted[0].checklist).toEqual([true, true, true, false, false]);
    expect(root.querySelector(".queue-item.reviewed")).not.toBeNull();
    expect(text(".verdict-badge")).toBe("confirmed_misinformation");
    expect(text(".run-stats")).toBe("1 of 3 reviewed");
    expect(text(".banner.info")).toContain("confirmed_misinformation recorded");
  });

  it("ignores submit attempts below the rubric threshold", async () => {
    const api = new FakeApi();
    const app = await appWithDomain(api);
    app.setReviewer("ana");
    app.setCheck(0, true);
    await app.submit("confirmed_misinformation");
    expect(api.posted).toHaveLength(0);
  });
});

describe("failure handling", () => {
  it("keeps the verdict as a local draft when the service is unreachable", async () => {
    const api = new FakeApi();
    api.postFailure = "network";
    const kv = new MemKV();
    let app = createApp(api, root, kv);
    await app.init();
    await app.selectDomain("p1.example");
    app.setReviewer("ana");
    app.setCheck(0, true);
    app.setCheck(2, true);
    app.setCheck(4, true);
    await app.submit("confirmed_misinformation");
    expect(text(".banner.draft")).toContain("saved as a local draft");
    expect([...kv.map.keys()].some((k) => k.includes("p1.example"))).toBe(true);

    // a fresh session restores the draft for the same run and domain
    api.postFailure = null;
    document.body.innerHTML = "";
    root = document.createElement("div");
    document.body.appendChild(root);
    app = createApp(api, root, kv);
    await app.init();
    await app.selectDomain("p1.example");
    const checked = [...root.querySelectorAll(".checklist input")].map(
      (n) => (n as HTMLInputElement).checked,
    );
    expect(checked).toEqual([true, false, true, false, true]);
    expect(text(".banner.draft")).toContain("restored local draft");

    await app.submit("confirmed_misinformation");
    expect(api.posted).toHaveLength(1);
    expect([...kv.map.keys()].some((k) => k.includes("p1.example"))).toBe(false);
  });

  it("shows a conflict banner on 409 and refreshes the item", async () => {
    const api = new FakeApi();
    const app = createApp(api, root, new MemKV());
    await app.init();
    await app.selectDomain("p1.example");
    app.setReviewer("ana");
    api.postFailure = "conflict";
    api.items = api.items.map((i) =>
      i.domain === "p1.example"
        ? { ...i, review: { verdict: "rejected", reviewer: "bob", timestamp: "t" } }
        : i,
    );
    await app.submit("rejected");
    expect(text(".banner.conflict")).toContain("already reviewed as 'rejected'");
    expect(root.querySelector(".queue-item.reviewed")).not.toBeNull();
  });

  it("offers a retry when a loader fails", async () => {
    const api = new FakeApi();
    let fail = true;
    const flaky: ReviewApi = {
      ...api,
      health: api.health.bind(api),
      runs: async () => {
        if (fail) throw new ApiError(500, "error", "boom");
        return api.runs();
      },
      queue: api.queue.bind(api),
      domain: api.domain.bind(api),
      postReview: api.postReview.bind(api),
    };
    const app = createApp(flaky, root, new MemKV());
    await app.init();
    expect(text(".banner.error")).toContain("boom");
    fail = false;
    (root.querySelector(".banner-retry") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(root.querySelector(".banner.error")).toBeNull();
    expect(root.querySelectorAll(".queue-domain").length).toBe(3);
  });
});
