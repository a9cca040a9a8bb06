import { scaleLinear } from "d3-scale";
import type { ScaleContinuousNumeric } from "d3-scale";
import { readTruth, type TruthRow } from "../csv.js";
import { tickLabel, type Tick } from "../svg.js";

export const RAD2DEG = 180 / Math.PI;

export function linearScale(
  domain: [number, number], range: [number, number], nice = true,
): ScaleContinuousNumeric<number, number> {
  const s = scaleLinear().domain(domain).range(range);
  return nice ? s.nice() : s;
}

export function ticksOf(
  scale: ScaleContinuousNumeric<number, number>, count: number,
): Tick[] {
  return scale.ticks(count).map((v) => ({ at: scale(v), label: tickLabel(v) }));
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

/** Truth rows for marker overlays: one trial's, optionally one cluster's. */
export function loadTruthMarkers(
  path: string, trial: number, cluster?: number,
): TruthRow[] {
  return readTruth(path).filter(
    (r) => r.trial === trial && (cluster === undefined || r.cluster === cluster),
  );
}

/** Peak value used for spectrum normalization; 1 when there is no signal. */
export function normalizer(values: number[]): number {
  const peak = values.reduce((m, v) => Math.max(m, Math.abs(v)), 0);
  return peak > 0 ? peak : 1;
}
