import type { CurveData, Vec3 } from './types.js';

/**
 * Display-only B-spline sampling for curve overlays (initial vs result
 * boundary curves). All authoritative geometry still comes from the service.
 */

function findSpan(knots: number[], degree: number, nCtrl: number, t: number): number {
  if (t >= knots[nCtrl]) return nCtrl - 1;
  let lo = degree;
  let hi = nCtrl;
  while (lo + 1 < hi) {
    const mid = (lo + hi) >> 1;
    if (t < knots[mid]) hi = mid;
    else lo = mid;
  }
  return lo;
}

export function evalCurve(curve: CurveData, t: number): Vec3 {
  const p = curve.degree;
  const span = findSpan(curve.knots, p, curve.control_points.length, t);
  // de Boor triangle over the p+1 active control points
  const pts: Vec3[] = [];
  for (let i = 0; i <= p; i += 1) {
    pts.push([...curve.control_points[span - p + i]] as Vec3);
  }
  for (let r = 1; r <= p; r += 1) {
    for (let i = p; i >= r; i -= 1) {
      const knotIndex = span - p + i;
      const denom = curve.knots[knotIndex + p - r + 1] - curve.knots[knotIndex];
      const alpha = denom === 0 ? 0 : (t - curve.knots[knotIndex]) / denom;
      pts[i] = [
        (1 - alpha) * pts[i - 1][0] + alpha * pts[i][0],
        (1 - alpha) * pts[i - 1][1] + alpha * pts[i][1],
        (1 - alpha) * pts[i - 1][2] + alpha * pts[i][2],
      ];
    }
  }
  return pts[p];
}

export function sampleCurve(curve: CurveData, count = 64): Vec3[] {
  const out: Vec3[] = [];
  for (let i = 0; i < count; i += 1) {
    out.push(evalCurve(curve, i / (count - 1)));
  }
  return out;
}
