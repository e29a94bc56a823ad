import { ApiClient, ApiError } from "./api";
import type { AnswerValue, BeliefExport, CandidateEntry, SessionPayload } from "./types";

/** Everything the screen shows, copied verbatim from one service response. */
export interface UiSessionView {
  sessionId: string;
  selector: string;
  questionId: string | null;
  questionText: string | null;
  answered: number;
  skipped: number;
  total: number;
  done: boolean;
  heatmap: BeliefExport;
  mapEstimate: [number, number];
  type1: CandidateEntry[] | null;
  type2: CandidateEntry[];
  /** When done: do the Type I and Type II lists name the same candidates in
   *  the same order? (They must.) */
  finalListsMatch: boolean | null;
}

export function viewFromPayload(payload: SessionPayload): UiSessionView {
  let finalListsMatch: boolean | null = null;
  if (payload.done && payload.recommendations.type1) {
    const t1 = payload.recommendations.type1.map((c) => c.candidate_id);
    const t2 = payload.recommendations.type2.map((c) => c.candidate_id);
    finalListsMatch = t1.length === t2.length && t1.every((id, i) => id === t2[i]);
  }
  return {
    sessionId: payload.session_id,
    selector: payload.selector,
    questionId: payload.question?.id ?? null,
    questionText: payload.question?.text ?? null,
    answered: payload.progress.answered,
    skipped: payload.progress.skipped,
    total: payload.progress.total,
    done: payload.done,
    heatmap: payload.belief,
    mapEstimate: payload.belief_summary.map_estimate,
    type1: payload.recommendations.type1,
    type2: payload.recommendations.type2,
    finalListsMatch,
  };
}

export interface FlowError {
  message: string;
  retryable: boolean;
}

/**
 * Session state machine: one API round-trip per user action, a single
 * in-flight request at a time, conflicts resolved by resyncing the session.
 */
export class SessionFlow {
  private view_: UiSessionView | null = null;
  private inFlight = false;
  private error_: FlowError | null = null;
  private lastAction: (() => Promise<SessionPayload>) | null = null;

  constructor(private client: ApiClient) {}

  get view(): UiSessionView | null {
    return this.view_;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  get error(): FlowError | null {
    return this.error_;
  }

  async start(selector: string, m?: number): Promise<UiSessionView> {
    return this.run(() => this.client.createSession(selector, m));
  }

  async restore(sessionId: string): Promise<UiSessionView> {
    return this.run(() => this.client.getSession(sessionId));
  }

  /** Answer (or skip) the pending question. Ignored while a request is in
   *  flight, so double-clicks cost nothing and record nothing twice. */
  async answer(value: AnswerValue): Promise<UiSessionView> {
    const view = this.view_;
    if (!view) throw new Error("no active session");
    if (this.inFlight || view.done || view.questionId === null) return view;
    const questionId = view.questionId;
    return this.run(() => this.client.submitAnswer(view.sessionId, questionId, value));
  }

  /** Re-issue the action behind the last error banner. */
  async retry(): Promise<UiSessionView | null> {
    if (!this.lastAction || this.inFlight) return this.view_;
    const action = this.lastAction;
    this.error_ = null;
    return this.run(action);
  }

  private async run(action: () => Promise<SessionPayload>,
  ): Promise<UiSessionView> {
    this.inFlight = true;
    this.lastAction = action;
    try {
      const payload = await action();
      this.view_ = viewFromPayload(payload);
      this.error_ = null;
      this.lastAction = null;
      return this.view_;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && this.view_) {
        // the answer was already recorded (e.g. a second tab); resync
        const payload = await this.client.getSession(this.view_.sessionId);
        this.view_ = viewFromPayload(payload);
        this.error_ = null;
        this.lastAction = null;
        return this.view_;
      }
      this.error_ = {
        message: err instanceof Error ? err.message : String(err),
        retryable: true,
      };
      throw err;
    } finally {
      this.inFlight = false;
    }
  }
}
