// Calibration session controller: debounced parameter changes, at most
// one in-flight /fuse with latest-wins supersede, and dirty-state
// tracking for the save button. No DOM here so the logic is unit-testable.

import { ApiError, CalibApi, FuseResponse, Params, ScoreResponse } from "./api.js";

export interface UiState {
  frame: number;
  params: Params;
  savedParams: Params | null;
  overlay: FuseResponse | null;
  score: ScoreResponse | null;
  banner: string | null; // server unreachable
  paramError: string | null; // inline validation message
  busy: boolean;
}

// slider/spinner ranges mirror the server-side invariants
export const PARAM_RANGES: Record<string, { min: number; max: number; step: number }> = {
  alpha: { min: 0, max: 2, step: 0.01 },
  beta: { min: 0, max: 2, step: 0.01 },
  gamma: { min: 0, max: 2, step: 0.01 },
  delta: { min: 0, max: 2, step: 0.01 },
  tau: { min: 0.01, max: 1, step: 0.01 },
  pregate_epsilon: { min: 0, max: 1, step: 0.05 },
  min_area: { min: 0, max: 400, step: 1 },
  margin: { min: 0, max: 32, step: 1 },
  iou_min: { min: 0, max: 1, step: 0.01 },
  gap_max: { min: 0, max: 30, step: 1 },
};

export function validateParam(name: string, value: number): string | null {
  const range = PARAM_RANGES[name];
  if (!range) return null;
  if (Number.isNaN(value)) return `${name}: not a number`;
  if (value < range.min || value > range.max) {
    return `${name}: must be in [${range.min}, ${range.max}]`;
  }
  return null;
}

type Listener = (state: UiState) => void;

export class CalibrationController {
  readonly state: UiState;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private pendingRefresh = false;
  private requestSeq = 0;
  private listeners: Listener[] = [];

  constructor(
    private readonly api: CalibApi,
    initial: Params,
    readonly debounceMs = 150,
    private readonly withScore = false,
  ) {
    this.state = {
      frame: 0,
      params: { ...initial },
      savedParams: { ...initial },
      overlay: null,
      score: null,
      banner: null,
      paramError: null,
      busy: false,
    };
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  get dirty(): boolean {
    const saved = this.state.savedParams;
    if (!saved) return true;
    return (Object.keys(this.state.params) as (keyof Params)[]).some(
      (key) => this.state.params[key] !== saved[key],
    );
  }

  setFrame(t: number): void {
    this.state.frame = t;
    this.scheduleRefresh(0); // scrubbing refreshes immediately
  }

  setParam(name: keyof Params, value: number | boolean): void {
    if (typeof value === "number") {
      const error = validateParam(name, value);
      this.state.paramError = error;
      if (error) {
        this.emit();
        return; // invalid values never reach the server
      }
    } else {
      this.state.paramError = null;
    }
    this.state.params = { ...this.state.params, [name]: value };
    this.scheduleRefresh(this.debounceMs);
  }

  /** Schedule a refresh; rapid calls within the debounce window coalesce. */
  scheduleRefresh(delayMs: number): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.refresh();
    }, delayMs);
    this.emit();
  }

  /** Issue the /fuse (+/score) request; stale responses are dropped and a
   * change arriving mid-flight triggers exactly one follow-up request. */
  async refresh(): Promise<void> {
    if (this.inFlight) {
      this.pendingRefresh = true;
      return;
    }
    this.inFlight = true;
    this.state.busy = true;
    const seq = ++this.requestSeq;
    const frame = this.state.frame;
    const params = { ...this.state.params };
    this.emit();
    try {
      const overlay = await this.api.fuse(frame, params);
      let score: ScoreResponse | null = null;
      if (this.withScore) {
        try {
          score = await this.api.score(frame, params);
        } catch (err) {
          if (!(err instanceof ApiError && err.status === 404)) throw err;
        }
      }
      if (seq === this.requestSeq) {
        this.state.overlay = overlay;
        this.state.score = score;
        this.state.banner = null;
      }
    } catch (err) {
      if (err instanceof ApiError && err.kind === "unreachable") {
        this.state.banner = "calibration server unreachable";
      } else if (err instanceof ApiError && err.kind === "validation") {
        this.state.paramError = err.message;
      } else {
        this.state.banner = String(err);
      }
    } finally {
      this.inFlight = false;
      this.state.busy = false;
      this.emit();
      if (this.pendingRefresh) {
        this.pendingRefresh = false;
        void this.refresh();
      }
    }
  }

  async save(): Promise<void> {
    try {
      const saved = await this.api.putConfig(this.state.params);
      this.state.savedParams = saved;
      this.state.banner = null;
      this.state.paramError = null;
    } catch (err) {
      if (err instanceof ApiError && err.kind === "validation") {
        this.state.paramError = err.message;
      } else {
        this.state.banner = String(err);
      }
    }
    this.emit();
  }

  async reloadSaved(): Promise<void> {
    const saved = await this.api.getConfig();
    this.state.params = { ...saved };
    this.state.savedParams = saved;
    this.scheduleRefresh(0);
  }

  /** Test hook: true when a request is being processed. */
  get requestInFlight(): boolean {
    return this.inFlight;
  }
}
