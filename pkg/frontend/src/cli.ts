#!/usr/bin/env node
import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { FigureSpec, outputName, plotDiscrepancy, plotMass, plotRatio, plotZeros } from "./plots.js";
import { SchemaError } from "./schema.js";

function usage(): void {
  console.error(
    "usage: modzero-viz <zeros-scatter|ratio-curve|discrepancy-curve|mass-heatmap> " +
      "<input...> [--out DIR]",
  );
}

export function main(argv: string[]): number {
  const args = [...argv];
  let outDir = ".";
  const outIdx = args.indexOf("--out");
  if (outIdx >= 0) {
    outDir = args[outIdx + 1] ?? ".";
    args.splice(outIdx, 2);
  }
  const [kind, ...inputs] = args;
  if (!kind || inputs.length === 0) {
    usage();
    return 1;
  }
  try {
    let svg: string;
    let spec: FigureSpec;
    switch (kind) {
      case "zeros-scatter":
        spec = { kind, input: inputs[0], outDir };
        svg = plotZeros(inputs[0]);
        break;
      case "ratio-curve":
        spec = { kind, input: inputs[0], outDir };
        svg = plotRatio(inputs[0]);
        break;
      case "discrepancy-curve":
        spec = { kind, input: inputs[0], outDir };
        svg = plotDiscrepancy(inputs);
        break;
      case "mass-heatmap":
        spec = { kind, input: inputs[0], outDir };
        svg = plotMass(inputs[0]);
        break;
      default:
        usage();
        return 1;
    }
    mkdirSync(outDir, { recursive: true });
    const path = join(outDir, outputName(spec));
    writeFileSync(path, svg);
    console.log(path);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
