/**
 * Near-field spectrum as two slice plots through the global peak: value
 * against bearing at the peak's range, and value against range at the peak's
 * bearing. Near-field truth positions overlay as dashed markers on both.
 * The input is the sparse masked-cell export, so each slice keeps whatever
 * lattice points survived the window restriction.
 */
import { readNearSpectrum, type NearSpectrumRow } from "../csv.js";
import {
  FONT, PALETTE, axisBottom, axisLeft, esc, frame, legend, plotArea, px,
  polyline, renderDoc, title as panelTitle, verticalMarker,
  type LegendEntry, type PanelBox,
} from "../svg.js";
import { RAD2DEG, extent, linearScale, loadTruthMarkers, normalizer, ticksOf } from "./common.js";
import type { TruthRow } from "../csv.js";

export interface Spectrum2dOptions {
  input: string;
  truth?: string;
  trial: number;
  cluster?: number;
  title?: string;
  xlabel?: string;
  ylabel?: string;
}

const PANEL_W = 520;
const PANEL_H = 440;

export function renderSpectrum2dSlices(opts: Spectrum2dOptions): string {
  const rows = readNearSpectrum(opts.input);
  const marks: TruthRow[] = opts.truth
    ? loadTruthMarkers(opts.truth, opts.trial, opts.cluster).filter((r) => r.field === "near")
    : [];

  const leftBox: PanelBox = { x0: 0, y0: 0, width: PANEL_W, height: PANEL_H };
  const rightBox: PanelBox = { x0: PANEL_W, y0: 0, width: PANEL_W, height: PANEL_H };

  if (rows.length === 0) {
    const body = [emptyPanel(leftBox, opts.xlabel ?? "bearing from array (deg)", opts.ylabel),
                  emptyPanel(rightBox, "range from array (m)", opts.ylabel)].join("\n");
    return renderDoc(2 * PANEL_W, PANEL_H, withTitle(body, leftBox, opts.title));
  }

  let peak = rows[0]!;
  for (const r of rows) if (r.value > peak.value) peak = r;
  const scaleBy = normalizer(rows.map((r) => r.value));

  const bearingSlice = rows
    .filter((r) => r.d_m === peak.d_m)
    .sort((a, b) => a.theta_rad - b.theta_rad);
  const rangeSlice = rows
    .filter((r) => r.theta_rad === peak.theta_rad)
    .sort((a, b) => a.d_m - b.d_m);

  const body = [
    slicePanel(
      leftBox,
      `bearing slice at d = ${peak.d_m.toFixed(2)} m`,
      bearingSlice.map((r) => ({ at: r.theta_rad * RAD2DEG, value: r.value / scaleBy })),
      marks.map((m) => m.theta_deg),
      opts.xlabel ?? "bearing from array (deg)",
      opts.ylabel ?? "normalized spectrum",
    ),
    slicePanel(
      rightBox,
      `range slice at theta = ${(peak.theta_rad * RAD2DEG).toFixed(2)} deg`,
      rangeSlice.map((r) => ({ at: r.d_m, value: r.value / scaleBy })),
      marks.map((m) => m.d_m),
      "range from array (m)",
      opts.ylabel ?? "normalized spectrum",
    ),
  ].join("\n");
  return renderDoc(2 * PANEL_W, PANEL_H, withTitle(body, leftBox, opts.title));
}

function withTitle(body: string, box: PanelBox, text?: string): string {
  if (!text) return body;
  const area = plotArea(box);
  return [panelTitle(area, text), body].join("\n");
}

function slicePanel(
  box: PanelBox,
  caption: string,
  points: Array<{ at: number; value: number }>,
  markerAts: number[],
  xlabel: string,
  ylabel: string,
): string {
  const area = plotArea(box);
  const x = linearScale(extent(points.map((p) => p.at)), [area.left, area.right]);
  const y = linearScale([0, 1.05], [area.bottom, area.top], false);
  const parts = [
    polyline(points.map((p) => ({ x: x(p.at), y: y(p.value) })), PALETTE[0]),
  ];
  const [lo, hi] = x.domain() as [number, number];
  let marked = false;
  for (const at of markerAts) {
    if (at < lo || at > hi) continue;
    parts.push(verticalMarker(area, x(at), PALETTE[2], "5 3", "truth-marker"));
    marked = true;
  }
  const entries: LegendEntry[] = [{ label: "spectrum", color: PALETTE[0] }];
  if (marked) entries.push({ label: "truth", color: PALETTE[2], dash: "5 3" });
  parts.push(
    frame(area),
    axisBottom(area, ticksOf(x, 6), xlabel),
    axisLeft(area, ticksOf(y, 5), ylabel),
    legend(entries, area.right - 110, area.top + 14),
    `<text x="${px((area.left + area.right) / 2)}" y="${px(area.top - 12)}" font-family="${FONT}" font-size="12" fill="#111111" text-anchor="middle">${esc(caption)}</text>`,
  );
  return parts.join("\n");
}

function emptyPanel(box: PanelBox, xlabel: string, ylabel?: string): string {
  const area = plotArea(box);
  const x = linearScale([0, 1], [area.left, area.right]);
  const y = linearScale([0, 1], [area.bottom, area.top]);
  return [
    frame(area),
    axisBottom(area, ticksOf(x, 5), xlabel),
    axisLeft(area, ticksOf(y, 5), ylabel ?? "normalized spectrum"),
    `<text x="${px((area.left + area.right) / 2)}" y="${px((area.top + area.bottom) / 2)}" font-family="${FONT}" font-size="12" fill="#777777" text-anchor="middle">no data</text>`,
  ].join("\n");
}
