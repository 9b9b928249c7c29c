// Small SVG string helpers shared by the figure builder.

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed two-decimal pixel coordinates keep the output byte-stable. */
export function px(v: number): string {
  return v.toFixed(2);
}

export function polyPoints(pts: readonly (readonly [number, number])[]): string {
  return pts.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
}

/** Tick label for 10^e, rendered with a tspan superscript. */
export function pow10Label(e: number, x: number, y: number, anchor: string): string {
  return (
    `<text x="${px(x)}" y="${px(y)}" text-anchor="${anchor}" class="tick">` +
    `10<tspan dy="-4" font-size="8">${e}</tspan></text>`
  );
}
