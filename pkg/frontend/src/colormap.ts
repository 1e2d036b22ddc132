/** Warp-angle color mapping and legend construction. */

export interface LegendEntry {
  value: number;
  color: string;
}

// Blue -> cyan -> green -> yellow -> red, the usual "cold to hot" scale.
const STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [33, 66, 171]],
  [0.25, [43, 180, 199]],
  [0.5, [73, 193, 80]],
  [0.75, [240, 210, 60]],
  [1.0, [204, 38, 38]],
];

function channel(a: number, b: number, t: number): number {
  return Math.round(a + (b - a) * t);
}

export function warpColor(value: number, max: number): string {
  const span = max > 0 ? max : 1;
  const x = Math.max(0, Math.min(1, value / span));
  for (let i = 1; i < STOPS.length; i += 1) {
    const [x1, c1] = STOPS[i];
    const [x0, c0] = STOPS[i - 1];
    if (x <= x1) {
      const t = (x - x0) / (x1 - x0);
      const r = channel(c0[0], c1[0], t);
      const g = channel(c0[1], c1[1], t);
      const b = channel(c0[2], c1[2], t);
      return `rgb(${r},${g},${b})`;
    }
  }
  const last = STOPS[STOPS.length - 1][1];
  return `rgb(${last[0]},${last[1]},${last[2]})`;
}

export function legendTicks(max: number, count = 5): LegendEntry[] {
  const ticks: LegendEntry[] = [];
  for (let i = 0; i < count; i += 1) {
    const value = (max * i) / (count - 1);
    ticks.push({ value, color: warpColor(value, max) });
  }
  return ticks;
}
