/** Batch plotting CLI: reads a sweep CSV, writes an SVG figure. */

import { plotThreshold } from "./threshold.js";
import { plotShuttling } from "./shuttling.js";

function usage(): never {
  console.error(
    "usage: node dist/cli.js <threshold|shuttling> <input.csv> <output.svg>");
  process.exit(2);
}

const [mode, input, output] = process.argv.slice(2);
if (!mode || !input || !output) usage();

if (mode === "threshold") {
  const plot = plotThreshold(input, output);
  for (const [fam, est] of Object.entries(plot.crossings)) {
    const text = est.estimate === null ? "none" :
      `${(100 * est.estimate).toFixed(3)}%`;
    console.log(`${fam}: crossing ${text}`);
  }
  console.log(`wrote ${output}`);
} else if (mode === "shuttling") {
  plotShuttling(input, output);
  console.log(`wrote ${output}`);
} else {
  usage();
}
