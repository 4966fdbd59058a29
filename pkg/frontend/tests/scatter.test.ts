import { describe, expect, it } from "vitest";

import { RenderState, hitTest, interpolate } from "../src/scatter.js";
import { makeMapping } from "../src/viewport.js";

const mapping = makeMapping(200, 200, 10);

function state(positions: [number, number][]): RenderState {
  return {
    ids: positions.map((_, i) => `d${i}`),
    positions,
    labels: null,
    colorByLabel: false,
    pendingIds: new Set(),
    selectedId: null,
  };
}

describe("interpolate", () => {
  it("is linear between endpoints", () => {
    const from: [number, number][] = [
      [0, 0],
      [1, 1],
    ];
    const to: [number, number][] = [
      [1, 0],
      [-1, 1],
    ];
    expect(interpolate(from, to, 0)).toEqual(from);
    expect(interpolate(from, to, 1)).toEqual(to);
    expect(interpolate(from, to, 0.5)).toEqual([
      [0.5, 0],
      [0, 1],
    ]);
  });

  it("falls back to the target for new points", () => {
    const out = interpolate([], [[0.3, 0.4]], 0.0);
    expect(out).toEqual([[0.3, 0.4]]);
  });
});

describe("hitTest", () => {
  it("picks the nearest point within the radius", () => {
    const s = state([
      [-0.5, 0],
      [0.5, 0],
    ]);
    const [px, py] = mapping.toScreen(0.5, 0);
    expect(hitTest(mapping, s, px + 3, py - 3)).toBe("d1");
  });

  it("returns null when nothing is close", () => {
    const s = state([[0, 0]]);
    const [px, py] = mapping.toScreen(0.9, 0.9);
    expect(hitTest(mapping, s, px, py)).toBeNull();
  });

  it("prefers the closer of overlapping points", () => {
    const s = state([
      [0, 0],
      [0.02, 0],
    ]);
    const [px, py] = mapping.toScreen(0.02, 0);
    expect(hitTest(mapping, s, px + 1, py)).toBe("d1");
  });
});
