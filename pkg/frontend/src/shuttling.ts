/** Shuttling figure: semilog error rate against effective distance with
 * per-series linear regressions on the log scale. */

import { writeFileSync } from "fs";

import { ResultRow, readResultCsv } from "./csv.js";
import { linearFit } from "./crossings.js";
import { Svg, linearScale, logScale, drawAxes, PALETTE, Frame } from "./svg.js";

export interface ShuttlingSeries {
  key: string;
  points: { d_eff: number; p_l: number; stderr: number }[];
  fit: { a: number; b: number } | null;
}

export function shuttlingSeries(rows: ResultRow[]): ShuttlingSeries[] {
  const groups = new Map<string, ResultRow[]>();
  for (const r of rows) {
    if (r.p_l <= 0) continue;
    const sh = r.family === "css_ld" ? r.p_sh_ld : r.p_sh_st;
    const key = `${r.family} p_sh=${(100 * sh).toFixed(2)}%`;
    groups.set(key, [...(groups.get(key) ?? []), r]);
  }
  const series: ShuttlingSeries[] = [];
  for (const [key, rs] of [...groups.entries()].sort()) {
    const points = rs
      .map((r) => ({ d_eff: r.d_eff, p_l: r.p_l, stderr: r.stderr }))
      .sort((a, b) => a.d_eff - b.d_eff);
    let fit: { a: number; b: number } | null = null;
    if (points.length >= 2) {
      fit = linearFit(points.map((pt) => pt.d_eff),
        points.map((pt) => Math.log10(pt.p_l)));
    }
    series.push({ key, points, fit });
  }
  return series;
}

export function renderShuttling(rows: ResultRow[]): { svg: string; series: ShuttlingSeries[] } {
  const series = shuttlingSeries(rows);
  const width = 520;
  const height = 380;
  const svg = new Svg(width, height);
  const frame: Frame = { left: 70, right: width - 20, top: 40, bottom: height - 55 };

  const allPts = series.flatMap((s) => s.points);
  if (!allPts.length) {
    throw new Error("no plottable rows (all error rates vanish)");
  }
  const dLo = Math.min(...allPts.map((pt) => pt.d_eff)) - 0.5;
  const dHi = Math.max(...allPts.map((pt) => pt.d_eff)) + 0.5;
  const pLo = Math.min(...allPts.map((pt) => pt.p_l)) * 0.5;
  const pHi = Math.max(...allPts.map((pt) => pt.p_l)) * 2;
  const x = linearScale(dLo, dHi, frame.left, frame.right);
  const y = logScale(pLo, pHi, frame.bottom, frame.top);
  drawAxes(svg, frame, x, y, "effective distance d_eff", "logical error rate",
    (v) => v.toFixed(1), (v) => v.toExponential(0));

  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    for (const pt of s.points) {
      svg.circle(x(pt.d_eff), y(pt.p_l), 3.5, `fill="${color}"`);
      const lo = Math.max(pt.p_l - pt.stderr, pLo);
      svg.line(x(pt.d_eff), y(lo), x(pt.d_eff), y(pt.p_l + pt.stderr),
        `stroke="${color}" stroke-width="1"`);
    }
    if (s.fit) {
      const y0 = 10 ** (s.fit.a + s.fit.b * dLo);
      const y1 = 10 ** (s.fit.a + s.fit.b * dHi);
      svg.line(x(dLo), y(Math.max(y0, pLo)), x(dHi), y(Math.max(y1, pLo)),
        `stroke="${color}" stroke-width="1.2" stroke-dasharray="6 4"`);
    }
    svg.text(frame.left + 10, frame.top + 14 + 14 * si, s.key,
      `font-size="12" fill="${color}"`);
  });

  return { svg: svg.render(), series };
}

export function plotShuttling(csvPath: string, outPath: string) {
  const rows = readResultCsv(csvPath);
  const plot = renderShuttling(rows);
  writeFileSync(outPath, plot.svg);
  return plot;
}
