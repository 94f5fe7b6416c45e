// Request lifecycle for the dual-pane view: debounced keystrokes, paired
// control/test fetches under one sequence number, and staleness rejection so
// the panes always show the latest completed pair and never mix two requests.

import type { CompleteFetcher, CompleteResponse } from "./api.js";

export interface UiState {
  prefix: string;
  month: number;
  alpha: number;
  debounceMs: number;
}

// rank improvement per promoted query: positive = moved up that many places,
// Infinity = absent from the control pane entirely (entered from beyond top K)
export type Promotions = Map<string, number>;

export interface PanePair {
  seq: number;
  prefix: string;
  month: number;
  alpha: number;
  control: CompleteResponse;
  test: CompleteResponse;
  promotions: Promotions;
}

export interface ControllerOptions {
  fetcher: CompleteFetcher;
  onRender: (pair: PanePair | null) => void; // null clears both panes
  onError: (message: string | null) => void; // null clears the banner
  debounceMs?: number;
  month?: number;
  alpha?: number;
}

export function computePromotions(
  control: CompleteResponse,
  test: CompleteResponse,
): Promotions {
  const controlRank = new Map<string, number>();
  for (const s of control.suggestions) controlRank.set(s.query, s.rank);
  const promotions: Promotions = new Map();
  for (const s of test.suggestions) {
    const before = controlRank.get(s.query);
    if (before === undefined) {
      promotions.set(s.query, Infinity);
    } else if (before > s.rank) {
      promotions.set(s.query, before - s.rank);
    }
  }
  return promotions;
}

export class TypeaheadController {
  readonly state: UiState;
  private readonly fetcher: CompleteFetcher;
  private readonly onRender: (pair: PanePair | null) => void;
  private readonly onError: (message: string | null) => void;
  private seq = 0;
  private renderedSeq = 0;
  private pendingTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(options: ControllerOptions) {
    this.fetcher = options.fetcher;
    this.onRender = options.onRender;
    this.onError = options.onError;
    this.state = {
      prefix: "",
      month: options.month ?? new Date().getMonth() + 1,
      alpha: options.alpha ?? 0.5,
      debounceMs: options.debounceMs ?? 100,
    };
  }

  keystroke(prefix: string): void {
    this.state.prefix = prefix;
    if (prefix === "") {
      this.cancelPending();
      this.seq += 1; // any in-flight pair is now stale
      this.renderedSeq = this.seq;
      this.onRender(null);
      return;
    }
    this.schedule();
  }

  setMonth(month: number): void {
    if (!Number.isInteger(month) || month < 1 || month > 12) {
      throw new Error(`month out of range: ${month}`);
    }
    this.state.month = month;
    if (this.state.prefix !== "") this.schedule();
  }

  setAlpha(alpha: number): void {
    if (!(alpha >= 0 && alpha <= 1)) throw new Error(`alpha out of range: ${alpha}`);
    this.state.alpha = alpha;
    if (this.state.prefix !== "") this.schedule();
  }

  /** Resolves once no fetch pair is in flight. Callers that use fake timers
   *  must advance them first so the debounce window has fired. */
  async whenIdle(): Promise<void> {
    while (this.inflight !== null) {
      await this.inflight;
    }
  }

  private inflight: Promise<void> | null = null;

  private cancelPending(): void {
    if (this.pendingTimer !== null) {
      clearTimeout(this.pendingTimer);
      this.pendingTimer = null;
    }
  }

  private schedule(): void {
    this.cancelPending();
    this.pendingTimer = setTimeout(() => {
      this.pendingTimer = null;
      this.inflight = this.issue().finally(() => {
        this.inflight = null;
      });
    }, this.state.debounceMs);
  }

  private async issue(): Promise<void> {
    const seq = ++this.seq;
    const { prefix, month, alpha } = this.state;
    try {
      const [control, test] = await Promise.all([
        this.fetcher({ prefix, month, alpha: 0 }),
        this.fetcher({ prefix, month, alpha }),
      ]);
      if (seq <= this.renderedSeq || seq < this.seq) {
        return; // a newer pair was issued or rendered: drop this one
      }
      this.renderedSeq = seq;
      this.onError(null);
      this.onRender({
        seq,
        prefix,
        month,
        alpha,
        control,
        test,
        promotions: computePromotions(control, test),
      });
    } catch (error) {
      // non-blocking: banner only, panes keep their last good state
      this.onError(error instanceof Error ? error.message : String(error));
    }
  }
}
