// Axis arithmetic. Everything here is pure; pixel rounding happens in svg.ts.

export type Scale = (v: number) => number;

export function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) return () => 0.5 * (r0 + r1);
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export const log10 = Math.log10;

/** Integer decade exponents between lo and hi, thinned to at most maxTicks. */
export function decadeTicks(loExp: number, hiExp: number, maxTicks = 8): number[] {
  const lo = Math.ceil(loExp - 1e-9);
  const hi = Math.floor(hiExp + 1e-9);
  if (hi < lo) return [];
  const step = Math.max(1, Math.ceil((hi - lo + 1) / maxTicks));
  const ticks: number[] = [];
  // Anchor on a multiple of step so reruns with the same range agree.
  const start = Math.ceil(lo / step) * step;
  for (let e = start; e <= hi; e += step) ticks.push(e === 0 ? 0 : e); // never -0
  if (ticks.length === 0) ticks.push(lo);
  return ticks;
}

export function niceLinTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return ticks;
}
