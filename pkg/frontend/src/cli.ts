#!/usr/bin/env node
/**
 * cellwatch-plot: render a figure from a result table.
 *
 *   cellwatch-plot plot --kind auc-vs-xi --in results/auc_vs_xi.csv --out fig.svg
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { CHART_KINDS, renderChart } from "./charts.js";
import { TableError, parseTable } from "./csv.js";

interface Args {
  kind: string;
  input: string;
  output: string;
}

function usage(): string {
  return [
    "usage: cellwatch-plot plot --kind <kind> --in <table.csv> --out <figure.svg>",
    `kinds: ${CHART_KINDS.join(", ")}`,
  ].join("\n");
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "plot") {
    throw new TableError(`unknown command ${JSON.stringify(argv[0] ?? "")}\n${usage()}`);
  }
  const values: Record<string, string> = {};
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === undefined || value === undefined || !flag.startsWith("--")) {
      throw new TableError(`malformed arguments\n${usage()}`);
    }
    values[flag.slice(2)] = value;
  }
  const kind = values["kind"];
  const input = values["in"];
  const output = values["out"];
  if (!kind || !input || !output) {
    throw new TableError(`--kind, --in and --out are required\n${usage()}`);
  }
  return { kind, input, output };
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const table = parseTable(readFileSync(args.input, "utf8"));
    const svg = renderChart(args.kind, table);
    writeFileSync(args.output, svg + "\n", "utf8");
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
