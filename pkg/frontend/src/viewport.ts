/**
 * Exact, invertible affine mapping between the model's viewport square
 * [-1, 1]^2 and canvas pixel coordinates (y axis flipped so that
 * viewport +y points up on screen).
 */

export interface Mapping {
  readonly width: number;
  readonly height: number;
  readonly margin: number;
  /** pixels per viewport unit, x axis */
  readonly scaleX: number;
  /** pixels per viewport unit, y axis */
  readonly scaleY: number;
  toScreen(x: number, y: number): [number, number];
  toViewport(px: number, py: number): [number, number];
}

export function makeMapping(width: number, height: number, margin = 24): Mapping {
  const scaleX = (width - 2 * margin) / 2;
  const scaleY = (height - 2 * margin) / 2;
  if (scaleX <= 0 || scaleY <= 0) {
    throw new Error(`canvas ${width}x${height} too small for margin ${margin}`);
  }
  return {
    width,
    height,
    margin,
    scaleX,
    scaleY,
    toScreen(x: number, y: number): [number, number] {
      return [margin + (x + 1) * scaleX, margin + (1 - y) * scaleY];
    },
    toViewport(px: number, py: number): [number, number] {
      return [(px - margin) / scaleX - 1, 1 - (py - margin) / scaleY];
    },
  };
}

/** Clamp a coordinate into the viewport square. */
export function clampViewport(v: number): number {
  return Math.max(-1, Math.min(1, v));
}
