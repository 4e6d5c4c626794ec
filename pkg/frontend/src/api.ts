/**
 * Typed client for the crowdreact /v1 endpoints.
 *
 * The fetch implementation is injectable so tests can run against a mock
 * service; the only configuration is the service base URL.
 */

import { ServiceError } from "./errors.js";

export interface AssessRequest {
  t1_text: string;
  t2_text: string;
  with_explanations?: boolean;
}

export interface AssessResponse {
  p_t1: number;
  verdict: boolean;
  mode: string;
  explanations?: { t1: string; t2: string };
}

export interface ComparisonRecord {
  first: number;
  second: number;
  p_first: number;
  first_wins: boolean;
}

export interface ComposeResponse {
  winner: string;
  candidates: string[];
  champion_path: number[];
  strategy: string;
  comparisons: ComparisonRecord[];
  explanations: Record<string, string>;
  order_sensitive: boolean | null;
}

export interface RunRecord {
  run_id: string;
  kind: string;
  status: string;
  started: string;
  finished: string;
  outputs: Record<string, unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
    } catch (cause) {
      throw ServiceError.network(cause);
    }
    return this.decode<T>(response);
  }

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`);
    } catch (cause) {
      throw ServiceError.network(cause);
    }
    return this.decode<T>(response);
  }

  private async decode<T>(response: Response): Promise<T> {
    if (!response.ok) {
      let body: unknown = undefined;
      try {
        body = await response.json();
      } catch {
        // non-JSON error body; status alone is enough to classify
      }
      throw ServiceError.fromResponse(response.status, body);
    }
    return (await response.json()) as T;
  }

  assess(request: AssessRequest): Promise<AssessResponse> {
    return this.post("/v1/assess", request);
  }

  compose(draft: string, nCandidates?: number): Promise<ComposeResponse> {
    const body: Record<string, unknown> = { draft };
    if (nCandidates !== undefined) body["n_candidates"] = nCandidates;
    return this.post("/v1/compose", body);
  }

  explain(text: string): Promise<{ text: string; prompt_digest: string }> {
    return this.post("/v1/explain", { text });
  }

  async runs(): Promise<RunRecord[]> {
    const payload = await this.get<{ runs: RunRecord[] }>("/v1/runs");
    return payload.runs;
  }

  health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.get("/v1/health");
  }
}
