/**
 * Draft session state machine.
 *
 * The session is stateless with respect to the engine: run records from
 * GET /v1/runs are enough to rebuild the timeline after a reload. Draft
 * edits bump a revision tag; a compose response that arrives for an older
 * revision is discarded, and at most one compose request is in flight.
 */

import { ApiClient, AssessResponse, ComposeResponse, RunRecord } from "./api.js";
import { ServiceError } from "./errors.js";

export type ComposeState =
  | { kind: "idle" }
  | { kind: "loading"; revision: number }
  | { kind: "ready"; revision: number; result: ComposeResponse }
  | { kind: "error"; revision: number; error: ServiceError };

export interface TournamentEntry {
  revision: number;
  draft: string;
  result: ComposeResponse;
}

export interface CompareState {
  a: string;
  b: string;
  result: AssessResponse;
}

export class DraftSession {
  draft = "";
  revision = 0;
  state: ComposeState = { kind: "idle" };
  history: TournamentEntry[] = [];
  comparisons: CompareState[] = [];
  chosen: string | null = null;

  constructor(private readonly api: ApiClient) {}

  /** Edit the draft; any in-flight compose becomes stale. */
  setDraft(text: string): void {
    if (text === this.draft) return;
    this.draft = text;
    this.revision += 1;
  }

  /**
   * Run the paraphrase tournament for the current draft.
   *
   * Returns false without touching the network when the draft is empty or
   * another compose is already in flight. The draft text survives failures.
   */
  async submitDraft(nCandidates?: number): Promise<boolean> {
    if (!this.draft.trim()) return false;
    if (this.state.kind === "loading") return false;

    const revision = this.revision;
    const draft = this.draft;
    this.state = { kind: "loading", revision };
    try {
      const result = await this.api.compose(draft, nCandidates);
      if (this.revision !== revision) {
        this.clearStaleLoading(revision);
        return false; // superseded by an edit
      }
      this.state = { kind: "ready", revision, result };
      this.history.push({ revision, draft, result });
      return true;
    } catch (error) {
      if (this.revision !== revision) {
        this.clearStaleLoading(revision);
        return false;
      }
      const serviceError =
        error instanceof ServiceError ? error : ServiceError.network(error);
      this.state = { kind: "error", revision, error: serviceError };
      return false;
    }
  }

  private clearStaleLoading(revision: number): void {
    if (this.state.kind === "loading" && this.state.revision === revision) {
      this.state = { kind: "idle" };
    }
  }

  /** Head-to-head comparison; identical or empty texts never reach the service. */
  async compareTwo(a: string, b: string, withExplanations = true): Promise<AssessResponse | null> {
    if (!a.trim() || !b.trim() || a === b) return null;
    const result = await this.api.assess({
      t1_text: a,
      t2_text: b,
      with_explanations: withExplanations,
    });
    this.comparisons.push({ a, b, result });
    return result;
  }

  /**
   * Pick the final text. A candidate is chosen as-is; any user edit is
   * logged as a new draft revision so the invariant "chosen text is a
   * candidate or an explicit revision" always holds.
   */
  chooseText(text: string): void {
    const candidates =
      this.state.kind === "ready" ? this.state.result.candidates : [];
    if (!candidates.includes(text)) {
      this.setDraft(text);
    }
    this.chosen = text;
  }

  get lastError(): ServiceError | null {
    return this.state.kind === "error" ? this.state.error : null;
  }

  /** Rebuild the timeline from the engine's run log (compose runs carry
   * their full response; the draft is the first candidate). */
  static fromRunRecords(api: ApiClient, records: RunRecord[]): DraftSession {
    const session = new DraftSession(api);
    for (const record of records) {
      if (record.kind !== "compose" || record.status !== "succeeded") continue;
      const result = record.outputs as unknown as ComposeResponse;
      if (!result || !Array.isArray(result.candidates) || !result.candidates.length) continue;
      session.revision += 1;
      session.draft = result.candidates[0] ?? "";
      session.history.push({ revision: session.revision, draft: session.draft, result });
      session.state = { kind: "ready", revision: session.revision, result };
    }
    return session;
  }

  static async reconstruct(api: ApiClient): Promise<DraftSession> {
    return DraftSession.fromRunRecords(api, await api.runs());
  }
}
