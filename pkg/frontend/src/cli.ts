#!/usr/bin/env node
import { parseArgs } from "node:util";
import { FIGURE_KINDS, FigureJob, FigureKind } from "./figures";
import { renderFigure } from "./render";

const USAGE = `usage: steplab-plots --kind <kind> --in <csv> --out <svg> [--value er|ef]
  kinds: ${FIGURE_KINDS.join(", ")}
  --value selects the column family for method_comparison (default er)`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        value: { type: "string" },
      },
      strict: true,
    });
  } catch (err) {
    console.error(`steplab-plots: ${(err as Error).message}\n${USAGE}`);
    return 1;
  }
  const { kind, in: input, out, value } = parsed.values;
  if (!kind || !input || !out) {
    console.error(`steplab-plots: --kind, --in and --out are required\n${USAGE}`);
    return 1;
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    console.error(`steplab-plots: unknown --kind '${kind}' (expected one of ${FIGURE_KINDS.join(", ")})`);
    return 1;
  }
  if (value !== undefined && value !== "er" && value !== "ef") {
    console.error(`steplab-plots: --value must be 'er' or 'ef', got '${value}'`);
    return 1;
  }
  const job: FigureJob = {
    inputCsv: input,
    figureKind: kind as FigureKind,
    outputImage: out,
    value: value as "er" | "ef" | undefined,
  };
  try {
    renderFigure(job);
  } catch (err) {
    console.error(`steplab-plots: ${(err as Error).message}`);
    return 2;
  }
  console.log(`${kind}: wrote ${out}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
