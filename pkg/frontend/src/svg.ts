/**
 * Deterministic SVG assembly. Every coordinate goes through a fixed-precision
 * formatter and nothing here reads the clock, the environment, or any random
 * source, so the same inputs always produce the same bytes.
 */

export const FONT = "Helvetica, Arial, sans-serif";

/** Okabe-Ito palette: colorblind-safe, fixed order. */
export const PALETTE = [
  "#0072b2", "#d55e00", "#009e73", "#cc79a7",
  "#e69f00", "#56b4e9", "#f0e442", "#000000",
] as const;

export const MARGIN = { top: 36, right: 18, bottom: 48, left: 70 } as const;

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Pixel coordinate: two decimals, always, so output never depends on locale
 * or on how a float happens to print. */
export function px(x: number): string {
  return x.toFixed(2);
}

/** Tick label: plain decimal in a sane range, otherwise mantissa-e-exponent. */
export function tickLabel(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 1e4 || a < 1e-3) {
    const exp = Math.floor(Math.log10(a) + 1e-12);
    const mantissa = trimNumber(x / 10 ** exp);
    return mantissa === "1" ? `1e${exp}`
      : mantissa === "-1" ? `-1e${exp}`
      : `${mantissa}e${exp}`;
  }
  return trimNumber(x);
}

function trimNumber(x: number): string {
  return String(Number(x.toPrecision(10)));
}

export interface Tick {
  at: number;
  label: string;
}

export interface PanelBox {
  /** Top-left corner of the full panel cell, including margins. */
  x0: number;
  y0: number;
  width: number;
  height: number;
}

export function plotArea(box: PanelBox) {
  return {
    left: box.x0 + MARGIN.left,
    right: box.x0 + box.width - MARGIN.right,
    top: box.y0 + MARGIN.top,
    bottom: box.y0 + box.height - MARGIN.bottom,
  };
}

type Area = ReturnType<typeof plotArea>;

export function frame(area: Area): string {
  const { left, right, top, bottom } = area;
  return `<rect x="${px(left)}" y="${px(top)}" width="${px(right - left)}" height="${px(bottom - top)}" fill="none" stroke="#333333" stroke-width="1"/>`;
}

export function axisBottom(area: Area, ticks: Tick[], label?: string): string {
  const parts: string[] = [];
  for (const t of ticks) {
    parts.push(
      `<line x1="${px(t.at)}" y1="${px(area.bottom)}" x2="${px(t.at)}" y2="${px(area.bottom + 5)}" stroke="#333333" stroke-width="1"/>`,
      `<text x="${px(t.at)}" y="${px(area.bottom + 18)}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="middle">${esc(t.label)}</text>`,
    );
  }
  if (label) {
    const cx = (area.left + area.right) / 2;
    parts.push(
      `<text x="${px(cx)}" y="${px(area.bottom + 38)}" font-family="${FONT}" font-size="12" fill="#111111" text-anchor="middle">${esc(label)}</text>`,
    );
  }
  return parts.join("\n");
}

export function axisLeft(area: Area, ticks: Tick[], label?: string): string {
  const parts: string[] = [];
  for (const t of ticks) {
    parts.push(
      `<line x1="${px(area.left - 5)}" y1="${px(t.at)}" x2="${px(area.left)}" y2="${px(t.at)}" stroke="#333333" stroke-width="1"/>`,
      `<text x="${px(area.left - 8)}" y="${px(t.at + 3.5)}" font-family="${FONT}" font-size="11" fill="#333333" text-anchor="end">${esc(t.label)}</text>`,
    );
  }
  if (label) {
    const cy = (area.top + area.bottom) / 2;
    const lx = area.left - 52;
    parts.push(
      `<text x="${px(lx)}" y="${px(cy)}" font-family="${FONT}" font-size="12" fill="#111111" text-anchor="middle" transform="rotate(-90 ${px(lx)} ${px(cy)})">${esc(label)}</text>`,
    );
  }
  return parts.join("\n");
}

export function gridLinesY(area: Area, ticks: Tick[]): string {
  return ticks
    .map((t) =>
      `<line x1="${px(area.left)}" y1="${px(t.at)}" x2="${px(area.right)}" y2="${px(t.at)}" stroke="#dddddd" stroke-width="0.5"/>`,
    )
    .join("\n");
}

export function title(area: Area, text: string): string {
  const cx = (area.left + area.right) / 2;
  return `<text x="${px(cx)}" y="${px(area.top - 12)}" font-family="${FONT}" font-size="13" fill="#111111" text-anchor="middle">${esc(text)}</text>`;
}

/** Polyline with gaps: a null point lifts the pen. */
export function polyline(
  points: Array<{ x: number; y: number } | null>,
  color: string,
  dash?: string,
): string {
  const segments: string[] = [];
  let pen = false;
  for (const p of points) {
    if (p === null) {
      pen = false;
      continue;
    }
    segments.push(`${pen ? "L" : "M"}${px(p.x)},${px(p.y)}`);
    pen = true;
  }
  if (segments.length === 0) return "";
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<path class="curve" d="${segments.join(" ")}" fill="none" stroke="${color}" stroke-width="1.5"${dashAttr}/>`;
}

export function verticalMarker(
  area: Area, x: number, color: string, dash: string, cssClass: string,
): string {
  return `<line class="${cssClass}" x1="${px(x)}" y1="${px(area.top)}" x2="${px(x)}" y2="${px(area.bottom)}" stroke="${color}" stroke-width="1.2" stroke-dasharray="${dash}"/>`;
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function legend(entries: LegendEntry[], x: number, y: number): string {
  const parts: string[] = [];
  entries.forEach((e, i) => {
    const ly = y + i * 16;
    const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
    parts.push(
      `<line x1="${px(x)}" y1="${px(ly)}" x2="${px(x + 22)}" y2="${px(ly)}" stroke="${e.color}" stroke-width="1.5"${dashAttr}/>`,
      `<text x="${px(x + 28)}" y="${px(ly + 3.5)}" font-family="${FONT}" font-size="11" fill="#333333">${esc(e.label)}</text>`,
    );
  });
  return parts.join("\n");
}

export function renderDoc(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}

/** Decade-only subset when the scale spans many decades, else all ticks. */
export function thinLogTicks(ticks: number[]): number[] {
  if (ticks.length <= 8) return ticks;
  const decades = ticks.filter((t) => {
    const l = Math.log10(t);
    return Math.abs(l - Math.round(l)) < 1e-9;
  });
  return decades.length >= 2 ? decades : ticks;
}
