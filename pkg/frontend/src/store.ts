import { ApiClient, isApiError } from "./api";
import type {
  EvaluationsPayload,
  SessionConfig,
  StatusPayload,
  TopicPoint,
} from "./types";

export const MAX_MODELS = 4;

/** One color per comparison slot, stable across tabs and index versions. */
export const SLOT_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

export interface ModelSlot {
  key: string;
  color: string;
}

export type BannerState =
  | { kind: "hidden" }
  | { kind: "offer"; version: number } // fresh notification: Update / Continue
  | { kind: "chip"; version: number }; // deferred offer, still adoptable

export interface ZoomWindow {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export interface ViewState {
  sessionId: string | null;
  activeTab: "topic" | "overall";
  measure: string;
  models: ModelSlot[];
  zoom: ZoomWindow | null;
  banner: BannerState;
  status: StatusPayload | null;
  topicData: EvaluationsPayload | null;
  overallData: EvaluationsPayload | null;
  error: string | null;
}

type Listener = (state: ViewState) => void;

/** All UI state and transitions; rendering subscribes to it. The store is
 * DOM-free so the protocol logic is testable against a fake client. */
export class SessionStore {
  state: ViewState = {
    sessionId: null,
    activeTab: "topic",
    measure: "ndcg",
    models: [],
    zoom: null,
    banner: { kind: "hidden" },
    status: null,
    topicData: null,
    overallData: null,
    error: null,
  };

  private listeners: Listener[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.notify();
  }

  // -- session lifecycle --------------------------------------------------

  async createSession(config: SessionConfig): Promise<boolean> {
    try {
      const { session_id } = await this.api.createSession(config);
      this.update({
        sessionId: session_id,
        measure: config.measure,
        models: [{ key: this.modelKey(config.model_id, config.model_params),
                   color: SLOT_COLORS[0] }],
        error: null,
      });
      await this.poll();
      await this.refreshData();
      return true;
    } catch (err) {
      this.update({ error: this.describe(err) });
      return false;
    }
  }

  modelKey(modelId: string, params?: Record<string, number>): string {
    const entries = Object.entries(params ?? {});
    if (entries.length === 0) return modelId;
    entries.sort(([a], [b]) => (a < b ? -1 : 1));
    const inner = entries.map(([k, v]) => `${k}=${v}`).join(",");
    return `${modelId}(${inner})`;
  }

  startPolling(intervalMs = 1000): void {
    this.stopPolling();
    this.timer = setInterval(() => {
      void this.poll();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One status poll; drives the banner state machine. */
  async poll(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    let status: StatusPayload;
    try {
      status = await this.api.status(sessionId);
    } catch (err) {
      this.update({ error: this.describe(err) });
      return;
    }
    const banner = this.nextBanner(status);
    const versionChanged =
      this.state.status !== null &&
      status.active_version !== this.state.status.active_version;
    this.update({ status, banner, error: this.state.error });
    if (versionChanged) {
      await this.refreshData(); // adoption elsewhere: keep charts current
    }
  }

  private nextBanner(status: StatusPayload): BannerState {
    const banner = this.state.banner;
    if (status.pending_version === null) {
      return { kind: "hidden" }; // adopted (here or elsewhere) or none yet
    }
    if (banner.kind === "hidden") {
      return { kind: "offer", version: status.pending_version };
    }
    if (banner.version !== status.pending_version) {
      // a newer version became pending; surface it as a fresh offer
      return { kind: "offer", version: status.pending_version };
    }
    return banner;
  }

  /** Update/Continue on the pending index version. Selections survive;
   * Update refreshes every chart, Continue leaves a persistent chip. */
  async decide(action: "update" | "continue"): Promise<void> {
    const sessionId = this.state.sessionId;
    const banner = this.state.banner;
    if (!sessionId || banner.kind === "hidden") return;
    try {
      const status = await this.api.decide(sessionId, action);
      if (action === "update") {
        this.update({ status, banner: { kind: "hidden" } });
        await this.refreshData();
      } else {
        this.update({ status, banner: { kind: "chip", version: banner.version } });
      }
    } catch (err) {
      if (isApiError(err) && err.status === 409) {
        // decided elsewhere first; drop the stale banner
        this.update({ banner: { kind: "hidden" } });
        await this.poll();
      } else {
        this.update({ error: this.describe(err) });
      }
    }
  }

  // -- models and measures -------------------------------------------------

  /** Register a model slot (max 4) and run it on the active snapshot. */
  async addModel(modelId: string, params?: Record<string, number>): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const key = this.modelKey(modelId, params);
    const exists = this.state.models.some((m) => m.key === key);
    if (!exists && this.state.models.length >= MAX_MODELS) {
      this.update({
        error: `at most ${MAX_MODELS} retrieval models can be compared`,
      });
      return;
    }
    try {
      await this.api.submitRun(sessionId, modelId, params);
    } catch (err) {
      this.update({ error: this.describe(err) });
      return;
    }
    if (!exists) {
      const color = SLOT_COLORS[this.state.models.length];
      this.update({ models: [...this.state.models, { key, color }], error: null });
    }
    await this.refreshData();
  }

  async setMeasure(measure: string): Promise<void> {
    this.update({ measure });
    await this.refreshData();
  }

  setTab(tab: "topic" | "overall"): void {
    this.update({ activeTab: tab });
  }

  setZoom(zoom: ZoomWindow | null): void {
    this.update({ zoom });
  }

  async refreshData(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const [topicData, overallData] = await Promise.all([
        this.api.evaluations(sessionId, this.state.measure, "topic"),
        this.api.evaluations(sessionId, this.state.measure, "overall"),
      ]);
      this.update({ topicData, overallData });
    } catch (err) {
      this.update({ error: this.describe(err) });
    }
  }

  // -- derived views ---------------------------------------------------------

  /** Scatter series: one (topic, value) list per evaluated model slot. */
  topicSeries(): { key: string; color: string; points: TopicPoint[] }[] {
    const data = this.state.topicData;
    if (!data) return [];
    return this.state.models
      .filter((m) => Array.isArray(data.models[m.key]))
      .map((m) => ({
        key: m.key,
        color: m.color,
        points: data.models[m.key] as TopicPoint[],
      }));
  }

  /** Bar chart input: mean per evaluated model slot. */
  overallMeans(): { key: string; color: string; value: number }[] {
    const data = this.state.overallData;
    if (!data) return [];
    return this.state.models
      .filter((m) => typeof data.models[m.key] === "number")
      .map((m) => ({
        key: m.key,
        color: m.color,
        value: data.models[m.key] as number,
      }));
  }

  clearError(): void {
    this.update({ error: null });
  }

  private describe(err: unknown): string {
    if (isApiError(err)) return `${err.status}: ${err.detail}`;
    return err instanceof Error ? err.message : String(err);
  }
}
