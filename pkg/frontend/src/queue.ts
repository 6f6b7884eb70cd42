import type { QueueItem, QueuePage } from "./types.js";

export function pageCount(total: number, size: number): number {
  if (size < 1) {
    throw new RangeError(`page size must be >= 1, got ${size}`);
  }
  return Math.max(1, Math.ceil(total / size));
}

export function clampPage(page: number, total: number, size: number): number {
  return Math.min(Math.max(1, page), pageCount(total, size));
}

/** Item counts per page, e.g. 3 items at size 2 -> [2, 1]. */
export function pageSizes(total: number, size: number): number[] {
  if (size < 1) {
    throw new RangeError(`page size must be >= 1, got ${size}`);
  }
  const sizes: number[] = [];
  for (let left = total; left > 0; left -= size) {
    sizes.push(Math.min(size, left));
  }
  return sizes;
}

/** Refresh poll results into the current page without reordering: review
 * status and confidences come from `fresh`, position comes from `current`. */
export function refreshItems(current: QueueItem[], fresh: QueueItem[]): QueueItem[] {
  const byDomain = new Map(fresh.map((item) => [item.domain, item]));
  return current.map((item) => byDomain.get(item.domain) ?? item);
}

/** Walk every page and return all items, throwing if the server pagination
 * ever skips or duplicates a domain across pages. */
export async function walkAll(
  fetchPage: (page: number) => Promise<QueuePage>,
): Promise<QueueItem[]> {
  const first = await fetchPage(1);
  const items: QueueItem[] = [];
  const seen = new Set<string>();
  const take = (page: QueuePage) => {
    for (const item of page.items) {
      if (seen.has(item.domain)) {
        throw new Error(`pagination duplicated ${item.domain} (page ${page.page})`);
      }
      seen.add(item.domain);
      items.push(item);
    }
  };
  take(first);
  const pages = pageCount(first.total, first.size);
  for (let p = 2; p <= pages; p++) {
    take(await fetchPage(p));
  }
  if (items.length !== first.total) {
    throw new Error(`pagination skipped items: saw ${items.length} of ${first.total}`);
  }
  return items;
}
