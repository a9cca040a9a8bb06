/**
 * Grid-reduction bars: full vs window-restricted lattice sizes per range
 * cluster, log scale, near and far side by side. Zero-size lattices have no
 * bar (nothing to draw at log scale).
 */
import { scaleBand, scaleLog } from "d3-scale";
import { readGridSizes } from "../csv.js";
import { SpecError } from "../figspec.js";
import {
  PALETTE, axisBottom, axisLeft, frame, gridLinesY, legend, plotArea, px,
  renderDoc, thinLogTicks, tickLabel, title as panelTitle,
  type PanelBox, type Tick,
} from "../svg.js";

export interface GridBarsOptions {
  input: string;
  title?: string;
  xlabel?: string;
  ylabel?: string;
}

const BOX: PanelBox = { x0: 0, y0: 0, width: 680, height: 460 };

const SERIES = [
  { key: "near_full", label: "near full", color: PALETTE[0] },
  { key: "near_kept", label: "near kept", color: PALETTE[5] },
  { key: "far_full", label: "far full", color: PALETTE[1] },
  { key: "far_kept", label: "far kept", color: PALETTE[4] },
] as const;

export function renderGridBars(opts: GridBarsOptions): string {
  const rows = readGridSizes(opts.input);
  if (rows.length === 0) {
    throw new SpecError(`${opts.input}: grid size file holds no data rows`);
  }
  const area = plotArea(BOX);
  const groups = rows.map((r) => String(r.cluster));
  const band = scaleBand<string>()
    .domain(groups)
    .range([area.left, area.right])
    .paddingInner(0.25)
    .paddingOuter(0.15);

  const counts = rows.flatMap((r) => SERIES.map((s) => r[s.key])).filter((v) => v > 0);
  if (counts.length === 0) {
    throw new SpecError(`${opts.input}: all lattice sizes are zero`);
  }
  const y = scaleLog()
    .domain([1, Math.max(...counts)])
    .range([area.bottom, area.top])
    .nice();
  const yTicks: Tick[] = thinLogTicks(y.ticks()).map((v) => ({
    at: y(v), label: tickLabel(v),
  }));

  const parts: string[] = [gridLinesY(area, yTicks)];
  const barWidth = band.bandwidth() / SERIES.length;
  for (const row of rows) {
    const groupX = band(String(row.cluster))!;
    SERIES.forEach((s, si) => {
      const v = row[s.key];
      if (v <= 0) return;
      const top = y(Math.max(v, 1));
      parts.push(
        `<rect class="bar" x="${px(groupX + si * barWidth)}" y="${px(top)}" width="${px(barWidth)}" height="${px(area.bottom - top)}" fill="${s.color}"/>`,
      );
    });
  }

  const xTicks: Tick[] = rows.map((r) => ({
    at: band(String(r.cluster))! + band.bandwidth() / 2,
    label: `tap ${r.cluster}`,
  }));

  if (opts.title) parts.push(panelTitle(area, opts.title));
  parts.push(
    frame(area),
    axisBottom(area, xTicks, opts.xlabel ?? "range cluster"),
    axisLeft(area, yTicks, opts.ylabel ?? "lattice points"),
    legend(
      SERIES.map((s) => ({ label: s.label, color: s.color })),
      area.right - 110, area.top + 14,
    ),
  );
  return renderDoc(BOX.width, BOX.height, parts.join("\n"));
}
