// 2-d drawing data derived from set/objective descriptors.
//
// The renderer only ever sees the JSON descriptors, so each shape is
// re-parameterized here from its stored fields.  Outlines are closed
// polygons sampled densely enough that a straight-line join is below a
// pixel at figure scale; sets that are not 2-d (or not drawable) yield
// null and the caller drops the geometry panel.

import type { ObjectiveDescriptor, SetDescriptor } from "./schema.js";

export type Pt = [number, number];

const TAU = 2 * Math.PI;

function arc(cx: number, cy: number, r: number, a0: number, a1: number, n: number): Pt[] {
  const pts: Pt[] = [];
  for (let i = 0; i <= n; i++) {
    const a = a0 + ((a1 - a0) * i) / n;
    pts.push([cx + r * Math.cos(a), cy + r * Math.sin(a)]);
  }
  return pts;
}

/** Andrew monotone chain; input order does not matter, output is CCW. */
function convexHull(pts: readonly Pt[]): Pt[] {
  const s = [...pts].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  if (s.length <= 2) return s;
  const cross = (o: Pt, a: Pt, b: Pt) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const half = (iter: readonly Pt[]): Pt[] => {
    const out: Pt[] = [];
    for (const p of iter) {
      while (out.length >= 2 && cross(out[out.length - 2]!, out[out.length - 1]!, p) <= 0) {
        out.pop();
      }
      out.push(p);
    }
    out.pop();
    return out;
  };
  return [...half(s), ...half([...s].reverse())];
}

function capsuleOutline(p: Pt, q: Pt, r: number, n: number): Pt[] {
  const dx = q[0] - p[0];
  const dy = q[1] - p[1];
  const len = Math.hypot(dx, dy);
  if (len === 0) return arc(p[0], p[1], r, 0, TAU, n);
  const theta = Math.atan2(dy, dx);
  const half = Math.max(8, Math.floor(n / 2));
  // Cap around q sweeps from -90 to +90 degrees relative to the axis, then
  // the cap around p picks up the other half; the straight edges fall out
  // of joining consecutive samples.
  return [
    ...arc(q[0], q[1], r, theta - Math.PI / 2, theta + Math.PI / 2, half),
    ...arc(p[0], p[1], r, theta + Math.PI / 2, theta + (3 * Math.PI) / 2, half),
  ];
}

function superflatProfile(x: number): number {
  return x === 0 ? 0 : Math.exp(-1 / (x * x));
}

function superflatOutline(scale: number, n: number): Pt[] {
  // Lower boundary y = exp(-1/x^2) on [-w, w], closed by a circular arc of
  // radius 2w centered on the y-axis (angles 60..120 degrees).
  const w = 0.5 * scale;
  const yw = superflatProfile(w);
  const R = 2 * w;
  const yc = yw - w * Math.sqrt(3);
  const half = Math.max(16, Math.floor(n / 2));
  const pts: Pt[] = [];
  for (let i = 0; i <= half; i++) {
    const x = -w + (2 * w * i) / half;
    pts.push([x, superflatProfile(x)]);
  }
  pts.push(...arc(0, yc, R, Math.PI / 3, (2 * Math.PI) / 3, half));
  return pts;
}

export function outlinePoints(set: SetDescriptor, n = 256): Pt[] | null {
  switch (set.kind) {
    case "l2ball": {
      if (set.center.length !== 2) return null;
      const [cx, cy] = set.center as [number, number];
      return arc(cx, cy, set.radius, 0, TAU, n);
    }
    case "lpball": {
      if (set.center.length !== 2) return null;
      const [cx, cy] = set.center as [number, number];
      const e = 2 / set.p;
      const pts: Pt[] = [];
      for (let i = 0; i < n; i++) {
        const a = (TAU * i) / n;
        const c = Math.cos(a);
        const s = Math.sin(a);
        pts.push([
          cx + set.radius * Math.sign(c) * Math.pow(Math.abs(c), e),
          cy + set.radius * Math.sign(s) * Math.pow(Math.abs(s), e),
        ]);
      }
      return pts;
    }
    case "simplex":
      // In the plane the probability simplex is the segment from e1 to e2.
      return set.dim === 2 ? [[1, 0], [0, 1]] : null;
    case "box": {
      if (set.lo.length !== 2) return null;
      const [x0, y0] = set.lo as [number, number];
      const [x1, y1] = set.hi as [number, number];
      return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    }
    case "ellipsoid": {
      if (set.center.length !== 2) return null;
      const [cx, cy] = set.center as [number, number];
      const A = set.axes;
      const pts: Pt[] = [];
      for (let i = 0; i < n; i++) {
        const a = (TAU * i) / n;
        const u: Pt = [Math.cos(a), Math.sin(a)];
        pts.push([
          cx + A[0]![0]! * u[0] + A[0]![1]! * u[1],
          cy + A[1]![0]! * u[0] + A[1]![1]! * u[1],
        ]);
      }
      return pts;
    }
    case "polytope": {
      if (set.vertices.length === 0 || set.vertices[0]!.length !== 2) return null;
      return convexHull(set.vertices.map((v) => [v[0]!, v[1]!] as Pt));
    }
    case "capsule": {
      if (set.p.length !== 2) return null;
      return capsuleOutline(set.p as [number, number], set.q as [number, number], set.radius, n);
    }
    case "stadium":
      return capsuleOutline([-set.half_length, 0], [set.half_length, 0], 1, n);
    case "truncated_disk": {
      const b = set.b;
      const alpha = Math.acos(b);
      const h = Math.sqrt(1 - b * b);
      // Long way around the arc from the lower chord corner to the upper one;
      // the chord itself closes the polygon.
      return [...arc(0, 0, 1, alpha, TAU - alpha, n), [b, -h], [b, h]];
    }
    case "superflat":
      return superflatOutline(set.scale, n);
    default:
      return null;
  }
}

// ----------------------------------------------------------------------
// objective evaluation

function psi(u: number): number {
  if (Math.abs(u) < 1e-3) {
    const u2 = u * u;
    // u - atan(u) = u^3/3 - u^5/5 + u^7/7 - ...
    return u * u2 * (1 / 3 - u2 * (0.2 - u2 / 7));
  }
  return u - Math.atan(u);
}

export function objectiveFn(obj: ObjectiveDescriptor): ((x: number, y: number) => number) | null {
  switch (obj.kind) {
    case "quadratic": {
      if (obj.c.length !== 2) return null;
      const [q00, q01] = obj.Q[0] as [number, number];
      const [q10, q11] = obj.Q[1] as [number, number];
      const [c0, c1] = obj.c as [number, number];
      return (x, y) =>
        0.5 * (x * (q00 * x + q01 * y) + y * (q10 * x + q11 * y)) + c0 * x + c1 * y;
    }
    case "linear": {
      if (obj.c.length !== 2) return null;
      const [c0, c1] = obj.c as [number, number];
      return (x, y) => c0 * x + c1 * y;
    }
    case "distance_power": {
      if (obj.anchor.length !== 2) return null;
      const [a0, a1] = obj.anchor as [number, number];
      const r = obj.r;
      return (x, y) => {
        const dx = x - a0;
        const dy = y - a1;
        return Math.pow(dx * dx + dy * dy, r / 2);
      };
    }
    case "stadium_psi":
      return (x, y) => 0.5 * y * y + psi(obj.c - x);
    default:
      return null;
  }
}

// ----------------------------------------------------------------------
// level sets (marching squares)

export interface BBox {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export type Segment = [Pt, Pt];

/**
 * Line segments of {f = level} inside bbox on an n x n grid.
 *
 * Standard 16-case marching squares with linear interpolation along cell
 * edges; the two saddle cases are disambiguated by the cell-center value.
 * Segments are emitted per cell and left unjoined, which is fine for SVG.
 */
export function levelSegments(
  f: (x: number, y: number) => number,
  bbox: BBox,
  level: number,
  n = 96,
): Segment[] {
  const xs = new Float64Array(n + 1);
  const ys = new Float64Array(n + 1);
  for (let i = 0; i <= n; i++) {
    xs[i] = bbox.x0 + ((bbox.x1 - bbox.x0) * i) / n;
    ys[i] = bbox.y0 + ((bbox.y1 - bbox.y0) * i) / n;
  }
  const vals = new Float64Array((n + 1) * (n + 1));
  for (let j = 0; j <= n; j++) {
    for (let i = 0; i <= n; i++) {
      vals[j * (n + 1) + i] = f(xs[i]!, ys[j]!);
    }
  }
  const segs: Segment[] = [];
  const lerp = (pa: Pt, pb: Pt, va: number, vb: number): Pt => {
    const t = va === vb ? 0.5 : (level - va) / (vb - va);
    return [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
  };
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const v00 = vals[j * (n + 1) + i]!;
      const v10 = vals[j * (n + 1) + i + 1]!;
      const v11 = vals[(j + 1) * (n + 1) + i + 1]!;
      const v01 = vals[(j + 1) * (n + 1) + i]!;
      if (![v00, v10, v11, v01].every(Number.isFinite)) continue;
      let code = 0;
      if (v00 >= level) code |= 1;
      if (v10 >= level) code |= 2;
      if (v11 >= level) code |= 4;
      if (v01 >= level) code |= 8;
      if (code === 0 || code === 15) continue;
      const p00: Pt = [xs[i]!, ys[j]!];
      const p10: Pt = [xs[i + 1]!, ys[j]!];
      const p11: Pt = [xs[i + 1]!, ys[j + 1]!];
      const p01: Pt = [xs[i]!, ys[j + 1]!];
      const bottom = () => lerp(p00, p10, v00, v10);
      const right = () => lerp(p10, p11, v10, v11);
      const top = () => lerp(p01, p11, v01, v11);
      const left = () => lerp(p00, p01, v00, v01);
      switch (code) {
        case 1: case 14: segs.push([left(), bottom()]); break;
        case 2: case 13: segs.push([bottom(), right()]); break;
        case 3: case 12: segs.push([left(), right()]); break;
        case 4: case 11: segs.push([right(), top()]); break;
        case 6: case 9: segs.push([bottom(), top()]); break;
        case 7: case 8: segs.push([left(), top()]); break;
        case 5: case 10: {
          const center = 0.25 * (v00 + v10 + v11 + v01);
          const flip = (center >= level) === (code === 5);
          if (flip) {
            segs.push([left(), bottom()], [right(), top()]);
          } else {
            segs.push([left(), top()], [bottom(), right()]);
          }
          break;
        }
      }
    }
  }
  return segs;
}

/** Deterministic contour levels from grid quantiles, deduplicated. */
export function defaultLevels(
  f: (x: number, y: number) => number,
  bbox: BBox,
  count = 5,
  n = 48,
): number[] {
  const vals: number[] = [];
  for (let j = 0; j <= n; j++) {
    for (let i = 0; i <= n; i++) {
      const v = f(bbox.x0 + ((bbox.x1 - bbox.x0) * i) / n, bbox.y0 + ((bbox.y1 - bbox.y0) * j) / n);
      if (Number.isFinite(v)) vals.push(v);
    }
  }
  if (vals.length === 0) return [];
  vals.sort((a, b) => a - b);
  const quantiles = [0.05, 0.15, 0.3, 0.5, 0.72, 0.9];
  const levels: number[] = [];
  for (let k = 0; k < Math.min(count, quantiles.length); k++) {
    const v = vals[Math.floor(quantiles[k]! * (vals.length - 1))]!;
    if (levels.length === 0 || v > levels[levels.length - 1]! + 1e-12) levels.push(v);
  }
  return levels;
}
