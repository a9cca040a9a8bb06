/**
 * Figure specifications: what to draw, from which CSVs, into which file.
 * A spec file is a JSON object or array of them; unknown keys are rejected
 * so a typo fails loudly instead of silently dropping an option.
 */
import { readFileSync } from "node:fs";
import { z } from "zod";

export class SpecError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SpecError";
  }
}

export const FIGURE_KINDS = [
  "spectrum1d", "spectrum2d_slices", "sweep_curves", "grid_bars",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const common = {
  input: z.string().min(1),
  out: z.string().min(1),
  title: z.string().optional(),
  xlabel: z.string().optional(),
  ylabel: z.string().optional(),
};

const truthMarks = {
  truth: z.string().optional(),
  trial: z.number().int().nonnegative().default(0),
  cluster: z.number().int().nonnegative().optional(),
};

export const figureSpecSchema = z.discriminatedUnion("kind", [
  z.strictObject({ kind: z.literal("spectrum1d"), ...common, ...truthMarks }),
  z.strictObject({ kind: z.literal("spectrum2d_slices"), ...common, ...truthMarks }),
  z.strictObject({
    kind: z.literal("sweep_curves"),
    ...common,
    method: z.string().optional(),
  }),
  z.strictObject({ kind: z.literal("grid_bars"), ...common }),
]);

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export function parseFigureSpec(value: unknown): FigureSpec {
  const result = figureSpecSchema.safeParse(value);
  if (!result.success) {
    const issues = result.error.issues
      .map((i) => (i.path.length ? `${i.path.join(".")}: ${i.message}` : i.message))
      .join("; ");
    throw new SpecError(`invalid figure spec: ${issues}`);
  }
  return result.data;
}

export function loadSpecFile(path: string): FigureSpec[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SpecError(`${path}: cannot read spec file (${(err as Error).message})`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new SpecError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const items = Array.isArray(parsed) ? parsed : [parsed];
  if (items.length === 0) {
    throw new SpecError(`${path}: spec file holds no figures`);
  }
  return items.map((item, i) => {
    try {
      return parseFigureSpec(item);
    } catch (err) {
      throw new SpecError(`${path}[${i}]: ${(err as Error).message}`);
    }
  });
}
