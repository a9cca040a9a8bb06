#!/usr/bin/env node
/**
 * Figure tool: renders SVG figures from the simulator's CSV output files,
 * either from a JSON spec file or from per-figure flags.
 *
 * Exit codes follow the simulator's convention: 0 success, 1 for config or
 * schema errors, 2 for runtime failures.
 */
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { SchemaError } from "./csv.js";
import { FIGURE_KINDS, SpecError, loadSpecFile, parseFigureSpec } from "./figspec.js";
import { renderToFile } from "./index.js";

const USAGE = `usage:
  irsloc-plot --spec FILE.json
  irsloc-plot KIND --input FILE.csv --out FILE.svg [options]

kinds: ${FIGURE_KINDS.join(", ")}

options:
  --spec FILE      JSON figure spec (one object or an array); ignores KIND
  --input FILE     input CSV (documented schema for the kind)
  --out FILE       output SVG path
  --truth FILE     truth CSV for marker overlays (spectrum kinds)
  --trial N        trial the markers come from (default 0)
  --cluster N      restrict markers to one range cluster
  --method NAME    keep a single method's curves (sweep_curves)
  --title TEXT     figure title
  --xlabel TEXT    x axis label
  --ylabel TEXT    y axis label
  --help           this text
`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        spec: { type: "string" },
        input: { type: "string" },
        out: { type: "string" },
        truth: { type: "string" },
        trial: { type: "string" },
        cluster: { type: "string" },
        method: { type: "string" },
        title: { type: "string" },
        xlabel: { type: "string" },
        ylabel: { type: "string" },
        help: { type: "boolean" },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    console.error(USAGE);
    return 1;
  }
  const { values, positionals } = parsed;

  if (values.help || argv.length === 0) {
    console.log(USAGE);
    return 0;
  }

  try {
    if (values.spec !== undefined) {
      if (positionals.length > 0) {
        throw new SpecError("--spec and a positional figure kind are mutually exclusive");
      }
      for (const spec of loadSpecFile(values.spec)) {
        console.log(`wrote ${renderToFile(spec)}`);
      }
      return 0;
    }

    if (positionals.length !== 1) {
      throw new SpecError(
        `expected exactly one figure kind (${FIGURE_KINDS.join(", ")}) or --spec FILE`,
      );
    }
    const kind = positionals[0]!;
    if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
      throw new SpecError(`unknown figure kind '${kind}' (try ${FIGURE_KINDS.join(", ")})`);
    }
    const candidate: Record<string, unknown> = { kind };
    if (values.input !== undefined) candidate.input = values.input;
    if (values.out !== undefined) candidate.out = values.out;
    if (values.truth !== undefined) candidate.truth = values.truth;
    if (values.trial !== undefined) candidate.trial = Number(values.trial);
    if (values.cluster !== undefined) candidate.cluster = Number(values.cluster);
    if (values.method !== undefined) candidate.method = values.method;
    if (values.title !== undefined) candidate.title = values.title;
    if (values.xlabel !== undefined) candidate.xlabel = values.xlabel;
    if (values.ylabel !== undefined) candidate.ylabel = values.ylabel;
    console.log(`wrote ${renderToFile(parseFigureSpec(candidate))}`);
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof SchemaError) {
      console.error(err.message);
      return 1;
    }
    console.error((err as Error).stack ?? String(err));
    return 2;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
