/**
 * Far-field spectrum: normalized value against bearing, the maximum marked,
 * far-field truth bearings overlaid as dashed vertical lines when a truth
 * CSV is supplied.
 */
import { readFarSpectrum } from "../csv.js";
import {
  FONT, PALETTE, axisBottom, axisLeft, esc, frame, legend, plotArea, px,
  polyline, renderDoc, title as panelTitle, verticalMarker,
  type LegendEntry, type PanelBox,
} from "../svg.js";
import { RAD2DEG, extent, linearScale, loadTruthMarkers, normalizer, ticksOf } from "./common.js";

export interface Spectrum1dOptions {
  input: string;
  truth?: string;
  trial: number;
  cluster?: number;
  title?: string;
  xlabel?: string;
  ylabel?: string;
}

const BOX: PanelBox = { x0: 0, y0: 0, width: 640, height: 440 };

export function renderSpectrum1d(opts: Spectrum1dOptions): string {
  const rows = readFarSpectrum(opts.input);
  const area = plotArea(BOX);
  const parts: string[] = [];
  if (opts.title) parts.push(panelTitle(area, opts.title));

  if (rows.length === 0) {
    const x = linearScale([0, 90], [area.left, area.right]);
    const y = linearScale([0, 1], [area.bottom, area.top]);
    parts.push(
      frame(area),
      axisBottom(area, ticksOf(x, 6), opts.xlabel ?? "bearing from array (deg)"),
      axisLeft(area, ticksOf(y, 5), opts.ylabel ?? "normalized spectrum"),
      `<text x="${px((area.left + area.right) / 2)}" y="${px((area.top + area.bottom) / 2)}" font-family="${FONT}" font-size="12" fill="#777777" text-anchor="middle">no data</text>`,
    );
    return renderDoc(BOX.width, BOX.height, parts.join("\n"));
  }

  const degs = rows.map((r) => r.theta_rad * RAD2DEG);
  const scaleBy = normalizer(rows.map((r) => r.value));
  const values = rows.map((r) => r.value / scaleBy);

  const x = linearScale(extent(degs), [area.left, area.right]);
  const y = linearScale([0, 1.05], [area.bottom, area.top], false);

  parts.push(
    polyline(degs.map((d, i) => ({ x: x(d), y: y(values[i]!) })), PALETTE[0]),
  );

  let peakIdx = 0;
  rows.forEach((r, i) => {
    if (r.value > rows[peakIdx]!.value) peakIdx = i;
  });
  const peakDeg = degs[peakIdx]!;
  parts.push(
    verticalMarker(area, x(peakDeg), PALETTE[1], "1 0", "peak-marker"),
    `<text x="${px(x(peakDeg) + 4)}" y="${px(area.top + 12)}" font-family="${FONT}" font-size="11" fill="${PALETTE[1]}">peak ${esc(peakDeg.toFixed(2))} deg</text>`,
  );

  const entries: LegendEntry[] = [{ label: "spectrum", color: PALETTE[0] }];
  if (opts.truth) {
    const marks = loadTruthMarkers(opts.truth, opts.trial, opts.cluster)
      .filter((r) => r.field === "far");
    const [lo, hi] = x.domain() as [number, number];
    for (const m of marks) {
      if (m.theta_deg < lo || m.theta_deg > hi) continue;
      parts.push(verticalMarker(area, x(m.theta_deg), PALETTE[2], "5 3", "truth-marker"));
    }
    if (marks.length > 0) entries.push({ label: "truth", color: PALETTE[2], dash: "5 3" });
  }

  parts.push(
    frame(area),
    axisBottom(area, ticksOf(x, 6), opts.xlabel ?? "bearing from array (deg)"),
    axisLeft(area, ticksOf(y, 5), opts.ylabel ?? "normalized spectrum"),
    legend(entries, area.right - 120, area.top + 14),
  );
  return renderDoc(BOX.width, BOX.height, parts.join("\n"));
}
