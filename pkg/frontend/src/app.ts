import { ApiError, isNetworkError, type ReviewApi } from "./api.js";
import { DraftStore, type KVStore } from "./drafts.js";
import {
  egonetCounts,
  labelColorClass,
  rawNumber,
  shareBars,
  sortedMonths,
} from "./panel.js";
import { clampPage, pageCount } from "./queue.js";
import { CHECKLIST, canSubmit, checkedCount, CONFIRM_THRESHOLD } from "./rubric.js";
import type { DomainView, QueueItem, QueuePage, RunInfo, Verdict } from "./types.js";

export interface AppOptions {
  pageSize?: number;
  /** Poll interval for read-through refresh; 0 disables the timer. */
  pollMs?: number;
}

interface Banner {
  kind: "error" | "conflict" | "draft" | "info";
  text: string;
  retry?: () => Promise<void>;
}

const REVIEWER_KEY = "navsift.reviewer";

export function createApp(
  api: ReviewApi,
  rootEl: HTMLElement,
  kv: KVStore,
  opts: AppOptions = {},
) {
  const doc = rootEl.ownerDocument;
  const pageSize = opts.pageSize ?? 20;
  const drafts = new DraftStore(kv);

  let runs: RunInfo[] = [];
  let runId: string | null = null;
  let queue: QueuePage | null = null;
  let view: DomainView | null = null;
  let viewNotFound: string | null = null;
  let activeMonth: string | null = null;
  let checklist: boolean[] = CHECKLIST.map(() => false);
  let reviewer = kv.getItem(REVIEWER_KEY) ?? "";
  let banner: Banner | null = null;
  let timer: ReturnType<typeof setInterval> | null = null;

  function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  function currentRun(): RunInfo | null {
    return runs.find((r) => r.run_id === runId) ?? null;
  }

  function selectedItem(): QueueItem | null {
    if (!queue || !view) return null;
    return queue.items.find((i) => i.domain === view!.domain) ?? null;
  }

  async function guarded(action: () => Promise<void>): Promise<void> {
    banner = null;
    try {
      await action();
    } catch (err) {
      banner = {
        kind: "error",
        text: err instanceof Error ? err.message : String(err),
        retry: action,
      };
    }
    render();
  }

  async function init(): Promise<void> {
    await guarded(async () => {
      runs = await api.runs();
      if (runs.length > 0 && runId === null) {
        runId = runs[0].run_id;
        queue = await api.queue(runId, 1, pageSize);
      }
    });
    if (opts.pollMs && opts.pollMs > 0 && timer === null) {
      timer = setInterval(() => {
        void refreshTick().catch(() => undefined);
      }, opts.pollMs);
    }
  }

  async function selectRun(id: string): Promise<void> {
    await guarded(async () => {
      runId = id;
      view = null;
      viewNotFound = null;
      queue = await api.queue(id, 1, pageSize);
    });
  }

  async function gotoPage(page: number): Promise<void> {
    if (!runId || !queue) return;
    const target = clampPage(page, queue.total, queue.size);
    await guarded(async () => {
      queue = await api.queue(runId!, target, pageSize);
    });
  }

  async function selectDomain(domain: string): Promise<void> {
    await guarded(async () => {
      viewNotFound = null;
      try {
        view = await api.domain(domain);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          view = null;
          viewNotFound = domain;
          return;
        }
        throw err;
      }
      const months = sortedMonths(view);
      activeMonth = months[months.length - 1] ?? null;
      checklist = CHECKLIST.map(() => false);
      const draft = runId ? drafts.load(runId, domain) : null;
      if (draft) {
        checklist = CHECKLIST.map((_, i) => draft.checklist[i] ?? false);
        banner = { kind: "draft", text: `restored local draft (${draft.verdict})` };
      }
    });
  }

  function setCheck(index: number, marked: boolean): void {
    checklist = checklist.map((v, i) => (i === index ? marked : v));
    render();
  }

  function setReviewer(name: string): void {
    reviewer = name;
    kv.setItem(REVIEWER_KEY, name);
    render();
  }

  function setMonth(month: string): void {
    activeMonth = month;
    render();
  }

  async function submit(verdict: Verdict): Promise<void> {
    if (!runId || !view) return;
    if (!canSubmit(verdict, checklist) || reviewer.trim() === "") return;
    const domain = view.domain;
    try {
      const item = await api.postReview({
        run_id: runId,
        domain,
        verdict,
        reviewer,
        checklist: [...checklist],
      });
      drafts.clear(runId, domain);
      if (queue) {
        queue = {
          ...queue,
          items: queue.items.map((i) => (i.domain === domain ? item : i)),
        };
      }
      view = { ...view, review: item.review };
      runs = await api.runs();
      banner = { kind: "info", text: `${verdict} recorded for ${domain}` };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        banner = { kind: "conflict", text: err.message };
        await refreshTick().catch(() => undefined);
      } else if (isNetworkError(err)) {
        drafts.save({
          runId,
          domain,
          verdict,
          checklist: [...checklist],
          savedAt: new Date().toISOString(),
        });
        banner = {
          kind: "draft",
          text: `service unreachable; ${verdict} for ${domain} saved as a local draft`,
        };
      } else {
        banner = {
          kind: "error",
          text: err instanceof Error ? err.message : String(err),
          retry: () => submit(verdict),
        };
      }
    }
    render();
  }

  /** Read-through refresh: review statuses may change in other sessions. */
  async function refreshTick(): Promise<void> {
    if (!runId) return;
    const [freshRuns, freshQueue] = await Promise.all([
      api.runs(),
      queue ? api.queue(runId, queue.page, pageSize) : Promise.resolve(null),
    ]);
    runs = freshRuns;
    if (freshQueue) queue = freshQueue;
    if (view) {
      const item = queue?.items.find((i) => i.domain === view!.domain);
      if (item) view = { ...view, review: item.review };
    }
    render();
  }

  function stop(): void {
    if (timer !== null) {
      clearInterval(timer);
      timer = null;
    }
  }

  // ---- rendering ----

  function renderBanner(parent: HTMLElement): void {
    if (!banner) return;
    const box = el("div", `banner ${banner.kind}`);
    box.appendChild(el("span", "banner-text", banner.text));
    if (banner.retry) {
      const retry = el("button", "banner-retry", "Retry");
      const action = banner.retry;
      retry.addEventListener("click", () => void guarded(action));
      box.appendChild(retry);
    }
    const dismiss = el("button", "banner-dismiss", "×");
    dismiss.addEventListener("click", () => {
      banner = null;
      render();
    });
    box.appendChild(dismiss);
    parent.appendChild(box);
  }

  function renderHeader(parent: HTMLElement): void {
    const header = el("header", "topbar");
    header.appendChild(el("h1", undefined, "navsift review"));
    const select = el("select", "run-select");
    for (const run of runs) {
      const option = doc.createElement("option");
      option.value = run.run_id;
      option.textContent = `${run.run_id} (${run.strategy}, ${run.n_positives} flagged)`;
      option.selected = run.run_id === runId;
      select.appendChild(option);
    }
    select.addEventListener("change", () => void selectRun(select.value));
    header.appendChild(select);
    const run = currentRun();
    if (run) {
      header.appendChild(
        el(
          "span",
          "run-stats",
          `${run.n_reviewed} of ${run.n_positives} reviewed`,
        ),
      );
    }
    parent.appendChild(header);
  }

  function renderQueue(parent: HTMLElement): void {
    const box = el("section", "queue");
    box.appendChild(el("h2", undefined, "Flagged domains"));
    if (!queue || queue.total === 0) {
      box.appendChild(el("div", "queue-empty", "No flagged domains"));
      parent.appendChild(box);
      return;
    }
    const list = el("ul", "queue-list");
    for (const item of queue.items) {
      const li = doc.createElement("li");
      const button = el("button", "queue-item");
      button.dataset.domain = item.domain;
      if (item.review) button.classList.add("reviewed");
      if (view && view.domain === item.domain) button.classList.add("selected");
      button.appendChild(el("span", "queue-domain", item.domain));
      button.appendChild(el("span", "queue-confidence", rawNumber(item.min_confidence)));
      if (item.review) {
        button.appendChild(el("span", "verdict-badge", item.review.verdict));
      }
      button.addEventListener("click", () => void selectDomain(item.domain));
      li.appendChild(button);
      list.appendChild(li);
    }
    box.appendChild(list);

    const pages = pageCount(queue.total, queue.size);
    const pager = el("div", "pager");
    const prev = el("button", "pager-prev", "Prev");
    prev.disabled = queue.page <= 1;
    prev.addEventListener("click", () => void gotoPage(queue!.page - 1));
    const next = el("button", "pager-next", "Next");
    next.disabled = queue.page >= pages;
    next.addEventListener("click", () => void gotoPage(queue!.page + 1));
    pager.appendChild(prev);
    pager.appendChild(el("span", "pager-label", `page ${queue.page} of ${pages}`));
    pager.appendChild(next);
    box.appendChild(pager);
    parent.appendChild(box);
  }

  function renderPanel(parent: HTMLElement): void {
    const panel = el("section", "panel");
    if (viewNotFound) {
      panel.appendChild(
        el("div", "panel-notfound", `${viewNotFound} has no traffic in any month`),
      );
      parent.appendChild(panel);
      return;
    }
    if (!view) {
      panel.appendChild(el("div", "panel-empty", "Select a flagged domain"));
      parent.appendChild(panel);
      return;
    }

    const title = el("div", "panel-title");
    title.appendChild(el("h2", "domain-title", view.domain));
    const cls = view.label
      ? view.label.propaganda
        ? "propaganda"
        : view.label.class
      : "unlabeled";
    title.appendChild(el("span", `label-badge ${labelColorClass(cls)}`, cls));
    if (view.review) {
      title.appendChild(
        el(
          "span",
          "review-status",
          `reviewed: ${view.review.verdict} by ${view.review.reviewer}`,
        ),
      );
    }
    panel.appendChild(title);

    const months = sortedMonths(view);
    const monthSelect = el("select", "month-select");
    for (const month of months) {
      const option = doc.createElement("option");
      option.value = month;
      option.textContent = month;
      option.selected = month === activeMonth;
      monthSelect.appendChild(option);
    }
    monthSelect.addEventListener("change", () => setMonth(monthSelect.value));
    panel.appendChild(monthSelect);

    const month = activeMonth && view.months[activeMonth] ? activeMonth : months[0];
    const mv = view.months[month];
    const totals = el("div", "totals");
    totals.appendChild(el("span", "inbound-total", `in ${rawNumber(mv.inbound_total)}`));
    totals.appendChild(el("span", "outbound-total", `out ${rawNumber(mv.outbound_total)}`));
    const ego = egonetCounts(mv.features);
    totals.appendChild(
      el("span", "egonet-counts", `egonets in ${ego.inbound} / out ${ego.outbound}`),
    );
    panel.appendChild(totals);

    const bars = el("div", "share-bars");
    for (const bar of shareBars(mv.features)) {
      const row = el("div", "bar-row");
      row.dataset.feature = bar.name;
      row.appendChild(el("span", "bar-name", bar.name));
      const track = el("div", "bar-track");
      const fill = el("div", "bar-fill");
      fill.style.width = `${bar.widthPct}%`;
      track.appendChild(fill);
      row.appendChild(track);
      row.appendChild(el("span", "bar-value", rawNumber(bar.value)));
      bars.appendChild(row);
    }
    panel.appendChild(bars);

    const table = el("table", "neighbor-table");
    for (const row of view.neighbors) {
      const tr = el("tr", "neighbor-row");
      const dot = el("td");
      dot.appendChild(el("span", `label-dot ${labelColorClass(row.label_class)}`));
      tr.appendChild(dot);
      tr.appendChild(el("td", "neighbor-domain", row.domain));
      tr.appendChild(el("td", "neighbor-class", row.label_class));
      tr.appendChild(el("td", "neighbor-weight", rawNumber(row.total_weight)));
      table.appendChild(tr);
    }
    panel.appendChild(table);

    renderForm(panel);
    parent.appendChild(panel);
  }

  function renderForm(panel: HTMLElement): void {
    const form = el("div", "review-form");
    form.appendChild(el("h3", undefined, "Verdict"));

    const reviewerInput = el("input", "reviewer-input") as HTMLInputElement;
    reviewerInput.placeholder = "reviewer id";
    reviewerInput.value = reviewer;
    reviewerInput.addEventListener("change", () => setReviewer(reviewerInput.value));
    form.appendChild(reviewerInput);

    const list = el("div", "checklist");
    CHECKLIST.forEach((text, i) => {
      const label = el("label", "check-row");
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.dataset.index = String(i);
      box.checked = checklist[i];
      box.addEventListener("change", () => setCheck(i, box.checked));
      label.appendChild(box);
      label.appendChild(el("span", undefined, text));
      list.appendChild(label);
    });
    form.appendChild(list);
    form.appendChild(
      el(
        "div",
        "check-counter",
        `${checkedCount(checklist)} of ${CONFIRM_THRESHOLD} needed to confirm`,
      ),
    );

    const reviewerOk = reviewer.trim() !== "";
    const buttons = el("div", "verdict-buttons");
    const mkButton = (cls: string, text: string, verdict: Verdict) => {
      const button = el("button", cls, text);
      button.disabled = !reviewerOk || !canSubmit(verdict, checklist);
      button.addEventListener("click", () => void submit(verdict));
      buttons.appendChild(button);
    };
    mkButton("confirm-mis", "Confirm misinformation", "confirmed_misinformation");
    mkButton("confirm-prop", "Confirm propaganda", "confirmed_propaganda");
    mkButton("reject", "Reject", "rejected");
    form.appendChild(buttons);
    panel.appendChild(form);
  }

  function render(): void {
    rootEl.textContent = "";
    renderBanner(rootEl);
    renderHeader(rootEl);
    const main = el("main", "columns");
    renderQueue(main);
    renderPanel(main);
    rootEl.appendChild(main);
  }

  render();
  return {
    init,
    selectRun,
    gotoPage,
    selectDomain,
    setCheck,
    setReviewer,
    setMonth,
    submit,
    refreshTick,
    stop,
  };
}

export type App = ReturnType<typeof createApp>;
