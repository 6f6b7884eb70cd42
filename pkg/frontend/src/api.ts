import type {
  DomainView,
  HealthInfo,
  QueueItem,
  QueuePage,
  ReviewRequest,
  RunInfo,
} from "./types.js";

/** Service error with the structured code the API returns. Status 0 means the
 * request never reached the service (network failure, refused connection). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function isNetworkError(err: unknown): boolean {
  return err instanceof ApiError && err.status === 0;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The surface the UI consumes; fakes implement this in tests. */
export interface ReviewApi {
  health(): Promise<HealthInfo>;
  runs(): Promise<RunInfo[]>;
  queue(runId: string, page?: number, size?: number): Promise<QueuePage>;
  domain(name: string): Promise<DomainView>;
  postReview(req: ReviewRequest): Promise<QueueItem>;
}

export class ApiClient implements ReviewApi {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    // bind lazily so a page-level fetch polyfill installed later still wins
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "network", err instanceof Error ? err.message : String(err));
    }
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      const code = body && typeof body.code === "string" ? body.code : "error";
      const message =
        body && typeof body.message === "string" ? body.message : `HTTP ${res.status}`;
      throw new ApiError(res.status, code, message);
    }
    return body as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("/health");
  }

  runs(): Promise<RunInfo[]> {
    return this.request("/runs");
  }

  queue(runId: string, page = 1, size = 20): Promise<QueuePage> {
    return this.request(
      `/runs/${encodeURIComponent(runId)}/queue?page=${page}&size=${size}`,
    );
  }

  domain(name: string): Promise<DomainView> {
    return this.request(`/domains/${encodeURIComponent(name)}`);
  }

  postReview(req: ReviewRequest): Promise<QueueItem> {
    return this.request("/reviews", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
