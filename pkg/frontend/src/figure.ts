// Two-panel run figure.
//
// Left: primal gap F against iteration t on log-log axes, one curve per
// rule, with dashed reference guides of prescribed slope.  Right: the
// feasible set, objective level sets, and iterate trajectories, drawn only
// when the run is 2-d (the summary carries a trajectory exactly in that
// case); otherwise the gap panel gets the full width and a warning is
// returned.  Output is plain SVG and is byte-identical across reruns of
// the same inputs.

import { writeFileSync } from "node:fs";

import {
  defaultLevels,
  levelSegments,
  objectiveFn,
  outlinePoints,
  type BBox,
  type Pt,
} from "./geometry.js";
import type { ObjectiveDescriptor, RunSummary, SetDescriptor, TraceRow } from "./schema.js";
import { readSummaryFile, readTraceFile } from "./schema.js";
import { decadeTicks, linScale, log10 } from "./scale.js";
import { esc, polyPoints, pow10Label, px } from "./svg.js";

export class FigureError extends Error {}

/** Gap values below this are drawn at the floor; log10(0) has no pixel. */
export const GAP_FLOOR = 1e-16;

export interface GeometryOverlay {
  set?: SetDescriptor;
  objective?: ObjectiveDescriptor;
  levels?: number[];
  gridN?: number;
}

export interface PlotSpec {
  /** Trace CSVs; each summary defaults to the sibling {base}.summary.json. */
  traces: { csv: string; summary?: string }[];
  /** Slope guide exponents for the gap panel, e.g. [-1, -2]. */
  guides: number[];
  out: string;
  title?: string;
  format?: "svg" | "png";
  /** Override the overlay, or pass null to force a single-panel figure. */
  geometry?: GeometryOverlay | null;
}

export interface LoadedRun {
  label: string;
  rows: TraceRow[];
  summary: RunSummary;
}

export interface FigureResult {
  svg: string;
  warnings: string[];
}

const PALETTE = ["#4361ee", "#e63946", "#2a9d8f", "#e9c46a", "#7b2cbf", "#577590"];
const RULE_COLORS: Record<string, string> = {
  ss: "#4361ee",
  ls: "#e63946",
  ol2: "#2a9d8f",
  ol3: "#e9c46a",
  ol4: "#7b2cbf",
};

function seriesColor(label: string, index: number): string {
  return RULE_COLORS[label] ?? PALETTE[index % PALETTE.length]!;
}

function clipGap(F: number): number {
  return Math.max(F, GAP_FLOOR);
}

// ----------------------------------------------------------------------
// gap panel

interface Panel {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

function gapPanelSvg(runs: LoadedRun[], guides: number[], panel: Panel): string {
  const series = runs.map((run, i) => {
    const pts: Pt[] = [];
    for (const r of run.rows) {
      if (r.t < 1 || !Number.isFinite(r.F)) continue;
      pts.push([log10(r.t), log10(clipGap(r.F))]);
    }
    return { label: run.label, color: seriesColor(run.label, i), pts };
  });
  if (series.every((s) => s.pts.length === 0)) {
    throw new FigureError("no plottable records with t >= 1");
  }

  let xHi = 1;
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const s of series) {
    for (const [x, y] of s.pts) {
      if (x > xHi) xHi = x;
      if (y < yLo) yLo = y;
      if (y > yHi) yHi = y;
    }
  }
  const xLoDec = 0;
  const xHiDec = Math.max(1, Math.ceil(xHi - 1e-9));
  let yLoDec = Math.floor(yLo);
  let yHiDec = Math.ceil(yHi + 1e-9);
  if (yHiDec <= yLoDec) yHiDec = yLoDec + 1;

  const sx = linScale(xLoDec, xHiDec, panel.x0, panel.x1);
  const sy = linScale(yLoDec, yHiDec, panel.y1, panel.y0); // svg y grows downward
  const out: string[] = [];
  out.push(`<g data-panel="gap">`);
  out.push(
    `<rect x="${px(panel.x0)}" y="${px(panel.y0)}" width="${px(panel.x1 - panel.x0)}" height="${px(panel.y1 - panel.y0)}" class="panel"/>`,
  );

  for (const e of decadeTicks(xLoDec, xHiDec)) {
    const X = sx(e);
    out.push(`<line x1="${px(X)}" y1="${px(panel.y0)}" x2="${px(X)}" y2="${px(panel.y1)}" class="grid"/>`);
    out.push(pow10Label(e, X, panel.y1 + 16, "middle"));
  }
  for (const e of decadeTicks(yLoDec, yHiDec)) {
    const Y = sy(e);
    out.push(`<line x1="${px(panel.x0)}" y1="${px(Y)}" x2="${px(panel.x1)}" y2="${px(Y)}" class="grid"/>`);
    out.push(pow10Label(e, panel.x0 - 6, Y + 3, "end"));
  }
  out.push(
    `<text x="${px(0.5 * (panel.x0 + panel.x1))}" y="${px(panel.y1 + 32)}" text-anchor="middle" class="axis">iteration t</text>`,
  );
  out.push(
    `<text transform="translate(${px(panel.x0 - 42)},${px(0.5 * (panel.y0 + panel.y1))}) rotate(-90)" text-anchor="middle" class="axis">primal gap F</text>`,
  );

  // Guides share a deterministic anchor: the largest clipped gap at the
  // start of the last two decades, raised 3x so they sit above the curves.
  if (guides.length > 0) {
    const tAnchor = Math.max(xLoDec, xHiDec - 2);
    let fAnchor = -Infinity;
    for (const s of series) {
      const at = s.pts.find(([x]) => x >= tAnchor - 1e-12);
      if (at && at[1] > fAnchor) fAnchor = at[1];
    }
    if (!Number.isFinite(fAnchor)) fAnchor = yHiDec - 1;
    fAnchor = Math.min(fAnchor + log10(3), yHiDec);
    for (const m of guides) {
      if (!Number.isFinite(m)) throw new FigureError(`guide slope must be finite, got ${m}`);
      let xEnd = xHiDec;
      let yEnd = fAnchor + m * (xEnd - tAnchor);
      if (yEnd < yLoDec && m !== 0) {
        xEnd = tAnchor + (yLoDec - fAnchor) / m;
        yEnd = yLoDec;
      }
      out.push(
        `<line x1="${px(sx(tAnchor))}" y1="${px(sy(fAnchor))}" x2="${px(sx(xEnd))}" y2="${px(sy(yEnd))}" class="guide" data-guide="${m}"/>`,
      );
      out.push(
        `<text x="${px(sx(tAnchor) - 4)}" y="${px(sy(fAnchor) - 4)}" text-anchor="start" class="guidelabel">slope ${m}</text>`,
      );
    }
  }

  for (const s of series) {
    if (s.pts.length === 0) continue;
    const pix = s.pts.map(([x, y]) => [sx(x), sy(y)] as Pt);
    out.push(
      `<polyline points="${polyPoints(pix)}" fill="none" stroke="${s.color}" stroke-width="1.6" data-series="${esc(s.label)}"/>`,
    );
  }

  series.forEach((s, i) => {
    const ly = panel.y0 + 14 + 16 * i;
    const lx = panel.x1 - 64;
    out.push(`<line x1="${px(lx)}" y1="${px(ly - 4)}" x2="${px(lx + 18)}" y2="${px(ly - 4)}" stroke="${s.color}" stroke-width="2"/>`);
    out.push(`<text x="${px(lx + 24)}" y="${px(ly)}" class="legend">${esc(s.label)}</text>`);
  });
  out.push(`</g>`);
  return out.join("\n");
}

// ----------------------------------------------------------------------
// geometry panel

function geometryPanelSvg(
  runs: LoadedRun[],
  overlay: GeometryOverlay,
  panel: Panel,
  warnings: string[],
): string {
  const first = runs[0]!.summary;
  const set = overlay.set ?? first.set;
  const objective = overlay.objective ?? first.objective;
  for (const run of runs.slice(1)) {
    if (
      JSON.stringify(run.summary.set) !== JSON.stringify(first.set) ||
      JSON.stringify(run.summary.objective) !== JSON.stringify(first.objective)
    ) {
      warnings.push("runs come from different instances; geometry panel shows the first one");
      break;
    }
  }

  const outline = outlinePoints(set);
  if (outline === null) warnings.push(`set outline unavailable for kind '${set.kind}'`);
  const f = objectiveFn(objective);
  if (f === null) warnings.push(`no level sets for objective kind '${objective.kind}'`);

  const trails: { color: string; pts: Pt[] }[] = [];
  runs.forEach((run, i) => {
    const traj = run.summary.trajectory;
    if (!traj) return;
    const stride = Math.max(1, Math.ceil(traj.length / 300));
    const pts: Pt[] = [];
    for (let k = 0; k < traj.length; k += stride) pts.push([traj[k]![1], traj[k]![2]]);
    const last = traj[traj.length - 1]!;
    const tail = pts[pts.length - 1]!;
    if (tail[0] !== last[1] || tail[1] !== last[2]) pts.push([last[1], last[2]]);
    trails.push({ color: seriesColor(run.label, i), pts });
  });

  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  const eat = (p: Pt) => {
    if (p[0] < xMin) xMin = p[0];
    if (p[0] > xMax) xMax = p[0];
    if (p[1] < yMin) yMin = p[1];
    if (p[1] > yMax) yMax = p[1];
  };
  outline?.forEach(eat);
  trails.forEach((tr) => tr.pts.forEach(eat));
  if (first.x0 && first.x0.length === 2) eat([first.x0[0]!, first.x0[1]!]);
  if (!Number.isFinite(xMin)) {
    warnings.push("geometry panel omitted: nothing drawable");
    return "";
  }
  // Pad, then equalize spans so a circle renders as a circle.
  const padX = 0.08 * (xMax - xMin || 1);
  const padY = 0.08 * (yMax - yMin || 1);
  xMin -= padX; xMax += padX; yMin -= padY; yMax += padY;
  const span = Math.max(xMax - xMin, yMax - yMin);
  const cx = 0.5 * (xMin + xMax);
  const cy = 0.5 * (yMin + yMax);
  const bbox: BBox = {
    x0: cx - span / 2,
    x1: cx + span / 2,
    y0: cy - span / 2,
    y1: cy + span / 2,
  };
  const sx = linScale(bbox.x0, bbox.x1, panel.x0, panel.x1);
  const sy = linScale(bbox.y0, bbox.y1, panel.y1, panel.y0);
  const P = (p: Pt): Pt => [sx(p[0]), sy(p[1])];

  const out: string[] = [];
  out.push(`<g data-panel="geometry">`);
  out.push(
    `<rect x="${px(panel.x0)}" y="${px(panel.y0)}" width="${px(panel.x1 - panel.x0)}" height="${px(panel.y1 - panel.y0)}" class="panel"/>`,
  );
  if (outline) {
    out.push(`<polygon points="${polyPoints(outline.map(P))}" class="set" data-set="${esc(set.kind)}"/>`);
  }
  if (f) {
    const levels = overlay.levels ?? defaultLevels(f, bbox);
    for (const level of levels) {
      const segs = levelSegments(f, bbox, level, overlay.gridN ?? 96);
      if (segs.length === 0) continue;
      const d = segs
        .map(([a, b]) => `M${px(sx(a[0]))} ${px(sy(a[1]))}L${px(sx(b[0]))} ${px(sy(b[1]))}`)
        .join("");
      out.push(`<path d="${d}" class="level" data-level="${level}"/>`);
    }
  }
  for (const tr of trails) {
    out.push(
      `<polyline points="${polyPoints(tr.pts.map(P))}" fill="none" stroke="${tr.color}" stroke-width="1.4" opacity="0.9" data-trajectory=""/>`,
    );
    const start = P(tr.pts[0]!);
    const end = P(tr.pts[tr.pts.length - 1]!);
    out.push(`<circle cx="${px(start[0])}" cy="${px(start[1])}" r="3.2" fill="#ffffff" stroke="${tr.color}" stroke-width="1.4"/>`);
    out.push(`<circle cx="${px(end[0])}" cy="${px(end[1])}" r="2.6" fill="${tr.color}"/>`);
  }
  out.push(
    `<text x="${px(0.5 * (panel.x0 + panel.x1))}" y="${px(panel.y1 + 16)}" text-anchor="middle" class="axis">${esc(set.kind)} / ${esc(objective.kind)}</text>`,
  );
  out.push(`</g>`);
  return out.join("\n");
}

// ----------------------------------------------------------------------
// assembly

const STYLE = [
  "text{font-family:Helvetica,Arial,sans-serif;fill:#1f2937}",
  ".title{font-size:13px;font-weight:bold}",
  ".tick{font-size:10px}",
  ".axis{font-size:11px}",
  ".legend{font-size:11px}",
  ".guidelabel{font-size:10px;fill:#6b7280}",
  ".panel{fill:none;stroke:#9ca3af;stroke-width:1}",
  ".grid{stroke:#e5e7eb;stroke-width:0.6}",
  ".guide{stroke:#6b7280;stroke-width:1;stroke-dasharray:5 3}",
  ".set{fill:#eef2f7;stroke:#475569;stroke-width:1.2}",
  ".level{fill:none;stroke:#9aa5b1;stroke-width:0.7}",
].join("");

export function buildFigure(
  runs: LoadedRun[],
  opts: { guides: number[]; title?: string; geometry?: GeometryOverlay | null },
): FigureResult {
  if (runs.length === 0) throw new FigureError("at least one trace is required");
  const warnings: string[] = [];
  const W = 880;
  const H = 400;
  const top = 36;
  const bottom = H - 46;

  const has2d = runs.some((r) => Array.isArray(r.summary.trajectory));
  const wantGeometry = opts.geometry !== null;
  let drawGeometry = wantGeometry;
  if (wantGeometry && !has2d) {
    warnings.push("geometry panel omitted: no 2-d trajectory in the summaries");
    drawGeometry = false;
  }

  const side = bottom - top;
  const geomPanel: Panel = { x0: W - 18 - side, y0: top, x1: W - 18, y1: bottom };
  const gapPanel: Panel = {
    x0: 58,
    y0: top,
    x1: drawGeometry ? geomPanel.x0 - 52 : W - 24,
    y1: bottom,
  };

  const title = opts.title ?? runs[0]!.summary.name.split("__")[0]!;
  const body: string[] = [];
  body.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
  );
  body.push(`<style>${STYLE}</style>`);
  body.push(`<rect x="0" y="0" width="${W}" height="${H}" fill="#ffffff"/>`);
  body.push(`<text x="${px(W / 2)}" y="20" text-anchor="middle" class="title">${esc(title)}</text>`);
  body.push(gapPanelSvg(runs, opts.guides, gapPanel));
  if (drawGeometry) {
    body.push(geometryPanelSvg(runs, opts.geometry ?? {}, geomPanel, warnings));
  }
  body.push(`</svg>`);
  return { svg: body.join("\n") + "\n", warnings };
}

export function summaryPathFor(csvPath: string): string {
  return csvPath.replace(/\.csv$/, "") + ".summary.json";
}

export function loadRun(csvPath: string, summaryPath?: string): LoadedRun {
  const rows = readTraceFile(csvPath);
  const summary = readSummaryFile(summaryPath ?? summaryPathFor(csvPath));
  return { label: summary.rule.label, rows, summary };
}

/** Load traces, build the figure, write it, and return any warnings. */
export function renderFigure(spec: PlotSpec): { outPath: string; warnings: string[] } {
  if (spec.traces.length === 0) throw new FigureError("at least one trace is required");
  const format = spec.format ?? "svg";
  if (format !== "svg") {
    throw new FigureError(`format '${format}' is not supported; only svg output is implemented`);
  }
  const runs = spec.traces.map((t) => loadRun(t.csv, t.summary));
  const { svg, warnings } = buildFigure(runs, {
    guides: spec.guides,
    title: spec.title,
    geometry: spec.geometry,
  });
  writeFileSync(spec.out, svg, "utf8");
  return { outPath: spec.out, warnings };
}
