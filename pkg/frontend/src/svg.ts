/** Minimal SVG scene builder: log/linear scales, axes, series, markers. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const f = ((value: number) =>
    outLo + ((Math.log10(value) - llo) / (lhi - llo)) * (outHi - outLo)) as Scale;
  f.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.floor(llo); e <= Math.ceil(lhi); e++) {
      const t = 10 ** e;
      if (t >= lo * 0.999 && t <= hi * 1.001) ticks.push(t);
    }
    if (ticks.length < 2) {
      ticks.length = 0;
      for (let k = 0; k <= 4; k++) ticks.push(10 ** (llo + (k * (lhi - llo)) / 4));
    }
    return ticks;
  };
  return f;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const f = ((value: number) =>
    outLo + ((value - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  f.ticks = () => {
    const ticks: number[] = [];
    for (let k = 0; k <= 5; k++) ticks.push(lo + (k * (hi - lo)) / 5);
    return ticks;
  };
  return f;
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Svg {
  parts: string[] = [];

  constructor(public width: number, public height: number) {}

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" ${style}/>`,
    );
  }

  polyline(points: [number, number][], style: string): void {
    const pts = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    this.parts.push(`<polyline fill="none" points="${pts}" ${style}/>`);
  }

  circle(x: number, y: number, r: number, style: string): void {
    this.parts.push(
      `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" ${style}/>`,
    );
  }

  text(x: number, y: number, value: string, style = ""): void {
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-family="sans-serif" ${style}>${esc(value)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="100%" height="100%" fill="white"/>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export interface Frame {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export function drawAxes(
  svg: Svg,
  frame: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  xFmt: (v: number) => string,
  yFmt: (v: number) => string,
): void {
  const axis = 'stroke="black" stroke-width="1"';
  svg.line(frame.left, frame.bottom, frame.right, frame.bottom, axis);
  svg.line(frame.left, frame.top, frame.left, frame.bottom, axis);
  for (const t of xScale.ticks()) {
    const x = xScale(t);
    svg.line(x, frame.bottom, x, frame.bottom + 5, axis);
    svg.text(x - 12, frame.bottom + 18, xFmt(t), 'font-size="11"');
  }
  for (const t of yScale.ticks()) {
    const y = yScale(t);
    svg.line(frame.left - 5, y, frame.left, y, axis);
    svg.text(frame.left - 44, y + 4, yFmt(t), 'font-size="11"');
  }
  svg.text((frame.left + frame.right) / 2 - 30, frame.bottom + 36, xLabel,
    'font-size="13"');
  svg.text(12, frame.top - 8, yLabel, 'font-size="13"');
}
