/** Threshold figure: log-log error-rate curves per distance with dashed
 * crossing markers, one panel per code family. */

import { writeFileSync } from "fs";

import { ResultRow, readResultCsv, families, distances } from "./csv.js";
import { estimateCrossings, CrossingEstimate } from "./crossings.js";
import { Svg, logScale, drawAxes, PALETTE, Frame } from "./svg.js";

export interface ThresholdPlot {
  svg: string;
  crossings: Record<string, CrossingEstimate>;
  skipped: string[];
}

export function renderThreshold(rows: ResultRow[]): ThresholdPlot {
  const fams = families(rows);
  const panels: string[] = [];
  const skipped: string[] = [];
  const crossings: Record<string, CrossingEstimate> = {};
  for (const fam of fams) {
    const famRows = rows.filter((r) => r.family === fam && r.p_l > 0);
    if (distances(famRows).length < 2) {
      skipped.push(fam);
      console.warn(`skipping family ${fam}: fewer than two distances`);
      continue;
    }
    panels.push(fam);
    crossings[fam] = estimateCrossings(rows, fam);
  }

  const panelW = 360;
  const height = 340;
  const svg = new Svg(Math.max(panels.length, 1) * panelW, height);

  panels.forEach((fam, idx) => {
    const famRows = rows.filter((r) => r.family === fam && r.p_l > 0);
    const frame: Frame = {
      left: idx * panelW + 60,
      right: (idx + 1) * panelW - 25,
      top: 40,
      bottom: height - 50,
    };
    const ps = famRows.map((r) => r.p);
    const pls = famRows.map((r) => r.p_l);
    const x = logScale(Math.min(...ps), Math.max(...ps), frame.left, frame.right);
    const y = logScale(Math.min(...pls) * 0.8, Math.max(...pls) * 1.25,
      frame.bottom, frame.top);
    drawAxes(svg, frame, x, y, "physical noise p", "logical error rate",
      (v) => v.toPrecision(2), (v) => v.toExponential(0));
    svg.text(frame.left + 8, frame.top - 12, fam, 'font-size="14" font-weight="bold"');

    distances(famRows).forEach((d, di) => {
      const color = PALETTE[di % PALETTE.length];
      const pts = famRows
        .filter((r) => r.d === d)
        .sort((a, b) => a.p - b.p);
      svg.polyline(
        pts.map((r) => [x(r.p), y(r.p_l)] as [number, number]),
        `stroke="${color}" stroke-width="1.5"`,
      );
      for (const r of pts) {
        svg.circle(x(r.p), y(r.p_l), 2.5, `fill="${color}"`);
        const lo = Math.max(r.p_l - r.stderr, 1e-12);
        const hi = r.p_l + r.stderr;
        svg.line(x(r.p), y(lo), x(r.p), y(hi), `stroke="${color}" stroke-width="1"`);
      }
      svg.text(frame.right - 60, frame.top + 14 + 14 * di, `d = ${d}`,
        `font-size="12" fill="${color}"`);
    });

    const est = crossings[fam].estimate;
    if (est !== null && est >= Math.min(...ps) && est <= Math.max(...ps)) {
      svg.line(x(est), frame.top, x(est), frame.bottom,
        'stroke="black" stroke-width="1" stroke-dasharray="6 4"');
      svg.text(x(est) - 30, frame.bottom + 32,
        `p_th = ${(100 * est).toFixed(2)}%`, 'font-size="12"');
    }
  });

  return { svg: svg.render(), crossings, skipped };
}

export function plotThreshold(csvPath: string, outPath: string): ThresholdPlot {
  const rows = readResultCsv(csvPath);
  const plot = renderThreshold(rows);
  writeFileSync(outPath, plot.svg);
  return plot;
}
