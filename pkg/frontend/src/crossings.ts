/** Pairwise threshold-crossing estimation on log error-rate curves.
 *
 * Mirrors the sweep command's estimator: for each pair of distances the
 * difference of log P_L is linearly interpolated in p; sign changes mark
 * crossings, and a family's estimate is their mean.
 */

import { ResultRow, distances } from "./csv.js";

export interface CrossingEstimate {
  crossings: number[];
  estimate: number | null;
  spread: number | null;
}

export function estimateCrossings(rows: ResultRow[], family: string): CrossingEstimate {
  const fam = rows.filter((r) => r.family === family && r.p_l > 0);
  const ds = distances(fam);
  const curve = new Map<number, Map<number, number>>();
  for (const d of ds) {
    const pts = new Map<number, number>();
    for (const r of fam.filter((r) => r.d === d)) {
      pts.set(r.p, Math.log(r.p_l));
    }
    curve.set(d, pts);
  }
  const crossings: number[] = [];
  for (let i = 0; i < ds.length; i++) {
    for (let j = i + 1; j < ds.length; j++) {
      const a = curve.get(ds[i])!;
      const b = curve.get(ds[j])!;
      const ps = [...a.keys()].filter((p) => b.has(p)).sort((x, y) => x - y);
      if (ps.length < 2) continue;
      const diff = ps.map((p) => b.get(p)! - a.get(p)!);
      for (let k = 0; k + 1 < ps.length; k++) {
        if (diff[k] === 0) {
          crossings.push(ps[k]);
        } else if (diff[k] * diff[k + 1] < 0) {
          const frac = diff[k] / (diff[k] - diff[k + 1]);
          crossings.push(ps[k] + frac * (ps[k + 1] - ps[k]));
        }
      }
    }
  }
  if (!crossings.length) {
    return { crossings, estimate: null, spread: null };
  }
  const estimate = crossings.reduce((s, c) => s + c, 0) / crossings.length;
  const spread = Math.max(...crossings) - Math.min(...crossings);
  return { crossings, estimate, spread };
}

/** Simple least-squares fit y = a + b x. */
export function linearFit(xs: number[], ys: number[]): { a: number; b: number } {
  const n = xs.length;
  const mx = xs.reduce((s, v) => s + v, 0) / n;
  const my = ys.reduce((s, v) => s + v, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) ** 2;
  }
  const b = sxx === 0 ? 0 : sxy / sxx;
  return { a: my - b * mx, b };
}
