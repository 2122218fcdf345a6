import { DisagreementReport, GROUPS, Landmarks, Point } from "./types.js";

export interface OverlayItem {
  index: number;
  a: Point;
  b: Point;
  distance: number;
}

/**
 * Pair up both labelers' points for exactly the indices the service flagged.
 * The service owns the tolerance decision; the UI only renders it.
 */
export function buildDisagreementOverlay(
  report: DisagreementReport,
  a: Landmarks,
  b: Landmarks,
): OverlayItem[] {
  const items: OverlayItem[] = [];
  for (const index of report.flagged) {
    const pa = a[index];
    const pb = b[index];
    if (!pa || !pb) continue; // presence mismatches are listed separately
    items.push({ index, a: pa, b: pb, distance: report.distances[String(index)] ?? NaN });
  }
  return items;
}

function centroid(points: Landmarks, start: number, stop: number): Point | null {
  let sx = 0;
  let sy = 0;
  let n = 0;
  for (let i = start; i < stop; i++) {
    const p = points[i];
    if (!p) return null; // group must be fully present
    sx += p[0];
    sy += p[1];
    n += 1;
  }
  return [sx / n, sy / n];
}

/**
 * Ghost point previewing nose completion: the mean of the two eye-contour
 * centroids and the mouth centroid, matching what the service computes.
 * Returns null when the nose is already placed or a source group is missing.
 */
export function nosePreview(points: Landmarks): Point | null {
  const [noseStart] = GROUPS.nose;
  if (points[noseStart]) return null;
  const left = centroid(points, ...GROUPS.leftEye);
  const right = centroid(points, ...GROUPS.rightEye);
  const mouth = centroid(points, ...GROUPS.mouth);
  if (!left || !right || !mouth) return null;
  return [(left[0] + right[0] + mouth[0]) / 3, (left[1] + right[1] + mouth[1]) / 3];
}
