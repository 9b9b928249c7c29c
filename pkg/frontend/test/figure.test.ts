// End-to-end figure tests on the committed golden traces, plus synthetic
// checks that the log-log wiring is actually right (a t^-2 curve must come
// out parallel to the -2 guide in pixel space).

import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it, vi } from "vitest";

import { buildFigure, loadRun, renderFigure, type LoadedRun } from "../src/figure.js";
import { runCli } from "../src/main.js";
import type { RunSummary, TraceRow } from "../src/schema.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const STADIUM = ["ss", "ls", "ol2"].map((rule) => join(FIXTURES, `stadium-fig1__${rule}.csv`));

function tmp(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "fwlab-fig-")), name);
}

function pixels(points: string): [number, number][] {
  return points.split(" ").map((p) => p.split(",").map(Number) as [number, number]);
}

/** Least-squares slope of a pixel polyline (dy per dx). */
function pxSlope(pts: [number, number][]): number {
  const n = pts.length;
  const mx = pts.reduce((s, p) => s + p[0], 0) / n;
  const my = pts.reduce((s, p) => s + p[1], 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (const [x, y] of pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  return sxy / sxx;
}

function syntheticRun(label: string, F: (t: number) => number, tMax = 1000): LoadedRun {
  const rows: TraceRow[] = [];
  for (let t = 0; t <= tMax; t++) {
    rows.push({ t, F: F(t), g: 1, d: 1, gamma: 0.5, delta: NaN, h: NaN });
  }
  const summary = {
    name: `synthetic__${label}`,
    set: { kind: "l2ball", center: [0, 0], radius: 1 },
    objective: { kind: "linear", c: [1, 0], L: 1 },
    rule: { label },
    final: { t: tMax, F: F(tMax), g: 1, d: 1, gamma: 0.5, delta: null, h: null },
    n_records: rows.length,
  } as unknown as RunSummary;
  return { label, rows, summary };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("stadium figure", () => {
  it("renders both panels from the three golden traces", () => {
    const out = tmp("fig1.svg");
    const { warnings } = renderFigure({
      traces: STADIUM.map((csv) => ({ csv })),
      guides: [-1, -2],
      out,
    });
    expect(warnings).toEqual([]);
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain('data-panel="gap"');
    expect(svg).toContain('data-panel="geometry"');
    for (const rule of ["ss", "ls", "ol2"]) {
      expect(svg).toContain(`data-series="${rule}"`);
    }
    expect(svg).toContain('data-guide="-1"');
    expect(svg).toContain('data-guide="-2"');
    expect(svg).toContain('data-set="stadium"');
    expect((svg.match(/data-level=/g) ?? []).length).toBeGreaterThanOrEqual(3);
    expect((svg.match(/data-trajectory/g) ?? []).length).toBe(3);
    expect(svg).toContain("stadium / stadium_psi");
  });

  it("is byte-identical across reruns", () => {
    const runs = STADIUM.map((csv) => loadRun(csv));
    const a = buildFigure(runs, { guides: [-1, -2] });
    const b = buildFigure(runs, { guides: [-1, -2] });
    expect(a.svg).toBe(b.svg);

    const out1 = tmp("a.svg");
    const out2 = tmp("b.svg");
    renderFigure({ traces: STADIUM.map((csv) => ({ csv })), guides: [-1, -2], out: out1 });
    renderFigure({ traces: STADIUM.map((csv) => ({ csv })), guides: [-1, -2], out: out2 });
    expect(readFileSync(out1, "utf8")).toBe(readFileSync(out2, "utf8"));
  });

  it("keeps every curve inside the gap panel", () => {
    const { svg } = buildFigure(STADIUM.map((csv) => loadRun(csv)), { guides: [-1, -2] });
    const rect = svg.match(/<rect x="([\d.]+)" y="([\d.]+)" width="([\d.]+)" height="([\d.]+)" class="panel"\/>/)!;
    const [x0, y0, w, h] = [+rect[1]!, +rect[2]!, +rect[3]!, +rect[4]!];
    for (const m of svg.matchAll(/<polyline points="([^"]+)"[^>]*data-series=/g)) {
      for (const [x, y] of pixels(m[1]!)) {
        expect(x).toBeGreaterThanOrEqual(x0 - 0.01);
        expect(x).toBeLessThanOrEqual(x0 + w + 0.01);
        expect(y).toBeGreaterThanOrEqual(y0 - 0.01);
        expect(y).toBeLessThanOrEqual(y0 + h + 0.01);
      }
    }
  });
});

describe("log-log wiring", () => {
  it("a t^-2 trace runs parallel to the -2 guide", () => {
    const run = syntheticRun("ss", (t) => 7 * Math.pow(Math.max(t, 1), -2));
    const { svg } = buildFigure([run], { guides: [-2] });
    const series = svg.match(/<polyline points="([^"]+)"[^>]*data-series="ss"/)!;
    const guide = svg.match(/<line x1="([\d.]+)" y1="([\d.]+)" x2="([\d.]+)" y2="([\d.]+)" class="guide" data-guide="-2"/)!;
    const sSeries = pxSlope(pixels(series[1]!));
    const sGuide = (+guide[4]! - +guide[2]!) / (+guide[3]! - +guide[1]!);
    expect(Math.abs(sSeries - sGuide)).toBeLessThan(0.01);
  });

  it("clips exact zeros at the gap floor instead of dropping them", () => {
    const run = syntheticRun("ss", (t) => (t < 10 ? Math.pow(2, -t) : 0), 100);
    const { svg } = buildFigure([run], { guides: [] });
    const series = svg.match(/<polyline points="([^"]+)"[^>]*data-series="ss"/)!;
    const pts = pixels(series[1]!);
    expect(pts.length).toBe(100); // t = 1..100 all present
    const floorY = Math.max(...pts.map((p) => p[1]));
    const tail = pts.slice(-50);
    for (const p of tail) expect(p[1]).toBeCloseTo(floorY, 6);
  });

  it("t = 0 never reaches the log axis", () => {
    const run = syntheticRun("ss", (t) => 1 / (t + 1), 10);
    const { svg } = buildFigure([run], { guides: [] });
    const series = svg.match(/<polyline points="([^"]+)"[^>]*data-series="ss"/)!;
    expect(pixels(series[1]!).length).toBe(10);
  });
});

describe("geometry panel fallbacks", () => {
  it("high-dimensional runs get a single panel and a warning", () => {
    const csv = join(FIXTURES, "simplex-negative-control__ss.csv");
    const { svg, warnings } = buildFigure([loadRun(csv)], { guides: [-1] });
    expect(warnings.some((w) => w.includes("geometry panel omitted"))).toBe(true);
    expect(svg).not.toContain('data-panel="geometry"');
    const rect = svg.match(/<rect x="[\d.]+" y="[\d.]+" width="([\d.]+)"/)!;
    expect(+rect[1]!).toBeGreaterThan(700); // gap panel takes the full width
  });

  it("mixing instances keeps the figure but warns", () => {
    const runs = [loadRun(STADIUM[0]!), syntheticRun("ol3", (t) => 1 / (t + 1))];
    const { svg, warnings } = buildFigure(runs, { guides: [] });
    expect(svg).toContain('data-panel="geometry"');
    expect(svg).toContain('data-set="stadium"');
    expect(warnings.some((w) => w.includes("different instances"))).toBe(true);
  });

  it("geometry: null forces a single panel without warnings", () => {
    const { svg, warnings } = buildFigure(
      STADIUM.map((csv) => loadRun(csv)),
      { guides: [], geometry: null },
    );
    expect(svg).not.toContain('data-panel="geometry"');
    expect(warnings).toEqual([]);
  });
});

describe("cli", () => {
  it("renders from a glob and reports the output path", () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    const out = tmp("cli.svg");
    const rc = runCli([join(FIXTURES, "stadium-fig1__*.csv"), "--out", out, "--guides", "-1,-2"]);
    expect(rc).toBe(0);
    expect(log).toHaveBeenCalledWith(`wrote ${out}`);
    const svg = readFileSync(out, "utf8");
    expect((svg.match(/data-series=/g) ?? []).length).toBe(3);
  });

  it("rejects png output", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const rc = runCli([STADIUM[0]!, "--out", tmp("x.png"), "--format", "png"]);
    expect(rc).toBe(1);
    expect(err.mock.calls.join(" ")).toContain("not supported");
  });

  it("fails cleanly on usage errors", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(runCli([])).toBe(1);
    expect(runCli(["--bogus"])).toBe(1);
    expect(runCli([join(FIXTURES, "does-not-exist.csv")])).toBe(1);
    expect(runCli([join(FIXTURES, "nothing-matches-*.csv")])).toBe(1);
    expect(runCli([STADIUM[0]!, "--guides", "1,fast"])).toBe(1);
  });

  it("fails when the sibling summary is missing", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    const dir = mkdtempSync(join(tmpdir(), "fwlab-fig-"));
    const csv = join(dir, "orphan.csv");
    writeFileSync(csv, "t,F,g,d,gamma,delta,h\n0,1,1,1,1,1,1\n");
    expect(runCli([csv])).toBe(1);
  });

  it("--help exits zero", () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    expect(runCli(["--help"])).toBe(0);
    expect(log.mock.calls[0]![0]).toContain("usage:");
  });
});
