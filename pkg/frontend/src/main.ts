// CLI entry point.
//
//   fwlab-fig out/stadium-fig1__*.csv --out fig1.svg --guides -1,-2
//
// Each CSV must have its sibling {base}.summary.json next to it; that file
// carries the rule label, the set/objective descriptors, and the 2-d
// trajectory the geometry panel needs.

import { existsSync, readdirSync } from "node:fs";
import { basename, dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { FigureError, renderFigure } from "./figure.js";
import { SchemaError } from "./schema.js";

const USAGE = `usage: fwlab-fig [options] <trace.csv> [...]

Render a gap-decay / geometry figure from solver trace CSVs.

positional arguments:
  trace.csv       trace files; a '*' in the basename expands within its
                  directory (each needs a sibling .summary.json)

options:
  --out PATH      output file (default: figure.svg)
  --guides LIST   comma-separated slope guides (default: -1,-2)
  --title TEXT    figure title (default: scenario name from the summary)
  --format FMT    output format; only 'svg' is implemented
  --no-geometry   skip the geometry panel even for 2-d runs
  -h, --help      show this message`;

function expandGlob(pattern: string): string[] {
  if (!pattern.includes("*")) return [pattern];
  const dir = dirname(pattern);
  if (basename(dir).includes("*")) {
    throw new FigureError(`'*' is only supported in the basename: ${pattern}`);
  }
  const re = new RegExp(
    "^" + basename(pattern).replace(/[.+^${}()|[\]\\]/g, "\\$&").replace(/\*/g, ".*") + "$",
  );
  const hits = readdirSync(dir)
    .filter((name) => re.test(name))
    .sort()
    .map((name) => join(dir, name));
  if (hits.length === 0) throw new FigureError(`no files match ${pattern}`);
  return hits;
}

export function runCli(argv: string[]): number {
  const csvs: string[] = [];
  let out = "figure.svg";
  let guides = "-1,-2";
  let title: string | undefined;
  let format = "svg";
  let geometry = true;

  try {
    for (let i = 0; i < argv.length; i++) {
      const arg = argv[i]!;
      const next = (): string => {
        const v = argv[++i];
        if (v === undefined) throw new FigureError(`${arg} needs a value`);
        return v;
      };
      if (arg === "-h" || arg === "--help") {
        console.log(USAGE);
        return 0;
      } else if (arg === "--out") {
        out = next();
      } else if (arg === "--guides") {
        guides = next();
      } else if (arg === "--title") {
        title = next();
      } else if (arg === "--format") {
        format = next();
      } else if (arg === "--no-geometry") {
        geometry = false;
      } else if (arg.startsWith("--")) {
        throw new FigureError(`unknown option ${arg}`);
      } else {
        csvs.push(...expandGlob(arg));
      }
    }
    if (csvs.length === 0) throw new FigureError("no trace files given (see --help)");

    const slopes = guides === "" ? [] : guides.split(",").map((s) => {
      const v = Number(s.trim());
      if (!Number.isFinite(v)) throw new FigureError(`bad guide slope '${s.trim()}'`);
      return v;
    });

    const traces = csvs.map((csv) => {
      if (!existsSync(csv)) throw new FigureError(`no such file: ${csv}`);
      return { csv };
    });
    const { outPath, warnings } = renderFigure({
      traces,
      guides: slopes,
      out,
      title,
      format: format as "svg" | "png",
      geometry: geometry ? undefined : null,
    });
    for (const w of warnings) console.warn(`fwlab-fig: warning: ${w}`);
    console.log(`wrote ${outPath}`);
    return 0;
  } catch (e) {
    if (e instanceof FigureError || e instanceof SchemaError) {
      console.error(`fwlab-fig: error: ${e.message}`);
      return 1;
    }
    if ((e as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`fwlab-fig: error: ${(e as Error).message}`);
      return 1;
    }
    throw e;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && fileURLToPath(import.meta.url) === resolve(process.argv[1]);
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
