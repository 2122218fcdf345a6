import { Landmarks, NUM_LANDMARKS, Point } from "../src/types.js";

/** Deterministic irregular sub-pixel layout covering all 60 slots. */
export function makePoints(offset = 0): Landmarks {
  const points: Landmarks = [];
  for (let i = 0; i < NUM_LANDMARKS; i++) {
    const x = 10 + 1.37 * i + Math.sin(i * 0.91) / 3 + offset;
    const y = 20 + 0.83 * i + Math.cos(i * 1.13) / 7 + offset;
    points.push([x, y] as Point);
  }
  return points;
}
