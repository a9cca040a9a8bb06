import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import type { FigureSpec } from "./figspec.js";
import { renderGridBars } from "./figures/gridbars.js";
import { renderSpectrum1d } from "./figures/spectrum1d.js";
import { renderSpectrum2dSlices } from "./figures/spectrum2d.js";
import { renderSweepCurves } from "./figures/sweep.js";

export { SchemaError } from "./csv.js";
export {
  readFarSpectrum, readGridSizes, readNearSpectrum, readSweep, readTruth,
} from "./csv.js";
export { FIGURE_KINDS, SpecError, loadSpecFile, parseFigureSpec } from "./figspec.js";
export type { FigureKind, FigureSpec } from "./figspec.js";
export { renderGridBars } from "./figures/gridbars.js";
export { renderSpectrum1d } from "./figures/spectrum1d.js";
export { renderSpectrum2dSlices } from "./figures/spectrum2d.js";
export { renderSweepCurves } from "./figures/sweep.js";

/** Render one figure to its SVG string (no file IO on the output side). */
export function renderFigure(spec: FigureSpec): string {
  switch (spec.kind) {
    case "spectrum1d":
      return renderSpectrum1d(spec);
    case "spectrum2d_slices":
      return renderSpectrum2dSlices(spec);
    case "sweep_curves":
      return renderSweepCurves(spec);
    case "grid_bars":
      return renderGridBars(spec);
  }
}

/** Render and write spec.out, creating parent directories as needed. */
export function renderToFile(spec: FigureSpec): string {
  const svg = renderFigure(spec);
  mkdirSync(dirname(spec.out), { recursive: true });
  writeFileSync(spec.out, svg, "utf8");
  return spec.out;
}
