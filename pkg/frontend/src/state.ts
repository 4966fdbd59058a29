/**
 * Client-side session state: the displayed layout, pending drag moves,
 * history browsing, and the update-model protocol (submit, trigger,
 * poll, fetch). All model math stays on the server; this store only
 * mirrors server responses.
 */

import { ApiClient, ApiError, Move, ProjectionPayload } from "./api.js";
import { clampViewport } from "./viewport.js";

export type TrainingStatus = "idle" | "training";

export interface Layout {
  ids: string[];
  positions: [number, number][];
  labels: number[] | null;
  iteration: number;
}

export interface UpdateResult {
  from: [number, number][];
  to: [number, number][];
}

function toLayout(p: ProjectionPayload): Layout {
  return { ids: p.ids, positions: p.positions, labels: p.labels, iteration: p.iteration };
}

export class SessionStore {
  sessionId: string | null = null;
  pipeline = "";
  layout: Layout | null = null; // the layout currently on screen
  latestIteration = 0;
  /** doc id -> dropped viewport position, not yet sent to the server */
  pending = new Map<string, [number, number]>();
  colorByLabel = true;
  status: TrainingStatus = "idle";
  /** set on network failure; the UI shows a retry banner while non-null */
  banner: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly pollMs = 500,
    private readonly onChange: () => void = () => {},
  ) {}

  private notify(): void {
    this.onChange();
  }

  async startSession(
    corpusId: string,
    pipeline: string,
    config: Record<string, unknown> = {},
  ): Promise<Layout> {
    const payload = await this.api.createSession(corpusId, pipeline, config);
    this.sessionId = payload.session_id;
    this.pipeline = payload.pipeline;
    this.layout = toLayout(payload);
    this.latestIteration = payload.iteration;
    this.pending.clear();
    this.status = "idle";
    this.banner = null;
    this.notify();
    return this.layout;
  }

  /** Position to draw for a doc: its pending drop if any, else the layout. */
  positionOf(id: string): [number, number] {
    const pending = this.pending.get(id);
    if (pending) return pending;
    if (!this.layout) throw new Error("no layout loaded");
    const row = this.layout.ids.indexOf(id);
    if (row < 0) throw new Error(`unknown doc id ${id}`);
    return this.layout.positions[row];
  }

  /** Record a drop. Coordinates are clamped into the viewport square. */
  dragTo(id: string, x: number, y: number): void {
    if (!this.layout || !this.layout.ids.includes(id)) {
      throw new Error(`unknown doc id ${id}`);
    }
    this.pending.set(id, [clampViewport(x), clampViewport(y)]);
    this.notify();
  }

  clearPending(): void {
    this.pending.clear();
    this.notify();
  }

  get pendingMoves(): Move[] {
    return [...this.pending.entries()].map(([id, [x, y]]) => ({ id, x, y }));
  }

  /** The update button is enabled only with pending moves on an idle session. */
  canUpdate(): boolean {
    return this.sessionId !== null && this.status === "idle" && this.pending.size >= 2;
  }

  /**
   * The full update-model protocol: submit the pending batch, trigger the
   * training job (pending clears once the trigger is accepted), poll the
   * status every pollMs until idle, then fetch the new layout. Returns the
   * old and new positions for the transition animation, or null if the
   * update could not start.
   */
  async updateModel(): Promise<UpdateResult | null> {
    if (!this.canUpdate() || !this.sessionId || !this.layout) return null;
    const sessionId = this.sessionId;
    const from = this.layout.positions.map((p) => [...p] as [number, number]);
    try {
      await this.api.submitInteractions(sessionId, this.pendingMoves);
      await this.api.triggerUpdate(sessionId);
    } catch (err) {
      if (err instanceof ApiError && err.isNetwork) {
        this.banner = "Network failure - check the server and retry.";
        this.notify();
        return null;
      }
      if (err instanceof ApiError && err.isBusy) {
        this.status = "training";
        this.notify();
        return null;
      }
      throw err;
    }
    this.pending.clear();
    this.status = "training";
    this.banner = null;
    this.notify();

    while (true) {
      await sleep(this.pollMs);
      try {
        const status = await this.api.getStatus(sessionId);
        if (status.status === "idle") break;
      } catch (err) {
        if (err instanceof ApiError && err.isNetwork) {
          this.banner = "Network failure while polling - retrying.";
          this.notify();
          continue;
        }
        throw err;
      }
    }

    const payload = await this.api.getProjection(sessionId);
    this.layout = toLayout(payload);
    this.latestIteration = payload.iteration;
    this.status = "idle";
    this.banner = null;
    this.notify();
    return { from, to: this.layout.positions };
  }

  /** Fetch and display a historical layout (display only; pending kept). */
  async browseHistory(iteration: number): Promise<Layout> {
    if (!this.sessionId) throw new Error("no session");
    const payload = await this.api.getProjection(this.sessionId, iteration);
    this.layout = toLayout(payload);
    this.notify();
    return this.layout;
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
