/**
 * Canvas scatterplot: renders up to a few thousand points, hit-tests
 * drags, and animates layout transitions with linear interpolation.
 */

import { Mapping } from "./viewport.js";

export const CLASS_COLORS = [
  "#111111",
  "#d62728",
  "#1f77b4",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
  "#e377c2",
];

export const NEUTRAL_COLOR = "#555555";
export const PENDING_COLOR = "#f5a623";

export interface RenderState {
  ids: string[];
  /** viewport positions, one per id (pending overrides already applied) */
  positions: [number, number][];
  labels: number[] | null;
  colorByLabel: boolean;
  pendingIds: Set<string>;
  selectedId: string | null;
}

/** Linear interpolation between two layouts at t in [0, 1]. */
export function interpolate(
  from: [number, number][],
  to: [number, number][],
  t: number,
): [number, number][] {
  return to.map((target, i) => {
    const source = from[i] ?? target;
    return [source[0] + (target[0] - source[0]) * t, source[1] + (target[1] - source[1]) * t];
  });
}

/** Nearest point within pickRadius pixels of (px, py), or null. */
export function hitTest(
  mapping: Mapping,
  state: RenderState,
  px: number,
  py: number,
  pickRadius = 8,
): string | null {
  let best: string | null = null;
  let bestDist = pickRadius;
  for (let i = 0; i < state.ids.length; i++) {
    const [sx, sy] = mapping.toScreen(state.positions[i][0], state.positions[i][1]);
    const d = Math.hypot(sx - px, sy - py);
    if (d <= bestDist) {
      bestDist = d;
      best = state.ids[i];
    }
  }
  return best;
}

export class Scatterplot {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private mapping: Mapping,
    private readonly radius = 5,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  setMapping(mapping: Mapping): void {
    this.mapping = mapping;
  }

  render(state: RenderState, positionsOverride?: [number, number][]): void {
    const { ctx } = this;
    const positions = positionsOverride ?? state.positions;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    // viewport frame
    const [x0, y0] = this.mapping.toScreen(-1, 1);
    const [x1, y1] = this.mapping.toScreen(1, -1);
    ctx.strokeStyle = "#cccccc";
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);

    for (let i = 0; i < state.ids.length; i++) {
      const id = state.ids[i];
      const [sx, sy] = this.mapping.toScreen(positions[i][0], positions[i][1]);
      const label = state.labels?.[i];
      const base =
        state.colorByLabel && label !== undefined && label !== null
          ? CLASS_COLORS[label % CLASS_COLORS.length]
          : NEUTRAL_COLOR;
      ctx.beginPath();
      ctx.arc(sx, sy, id === state.selectedId ? this.radius + 2 : this.radius, 0, 2 * Math.PI);
      ctx.fillStyle = base;
      ctx.globalAlpha = 0.85;
      ctx.fill();
      ctx.globalAlpha = 1.0;
      if (state.pendingIds.has(id)) {
        ctx.strokeStyle = PENDING_COLOR;
        ctx.lineWidth = 2.5;
        ctx.stroke();
        ctx.lineWidth = 1;
      }
    }
  }

  /** Animate from -> to over ms milliseconds (linear), rendering each frame. */
  animate(state: RenderState, from: [number, number][], to: [number, number][], ms = 400): Promise<void> {
    return new Promise((resolve) => {
      const start = now();
      const tick = () => {
        const t = Math.min(1, (now() - start) / ms);
        this.render(state, interpolate(from, to, t));
        if (t >= 1) {
          resolve();
        } else {
          raf(tick);
        }
      };
      raf(tick);
    });
  }
}

function now(): number {
  return typeof performance !== "undefined" ? performance.now() : Date.now();
}

function raf(fn: () => void): void {
  if (typeof requestAnimationFrame !== "undefined") {
    requestAnimationFrame(fn);
  } else {
    setTimeout(fn, 16);
  }
}
