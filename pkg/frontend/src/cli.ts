#!/usr/bin/env node
/**
 * Command line entry point.
 *
 *   nvnmr-render render --kind spectrum --in sweep.csv --out sweep.svg
 *
 * --in may repeat for figure kinds that overlay several CSVs.  Exit codes:
 * 0 success, 1 bad input data (unreadable file, wrong schema, corrupt rows),
 * 2 bad usage (unknown flags, missing arguments, unknown figure kind).
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { CsvError } from "./csv.js";
import { buildFigure, figureKind, FIGURE_KINDS, type FigureInput } from "./figures.js";

export const EXIT_OK = 0;
export const EXIT_DATA = 1;
export const EXIT_USAGE = 2;

const USAGE = `usage: nvnmr-render render --kind KIND --in FILE.csv [--in FILE.csv ...] --out FILE.svg
kinds: ${FIGURE_KINDS.join(", ")}`;

interface RenderArgs {
  kind: string;
  inputs: string[];
  out: string;
}

function parseArgs(argv: string[]): RenderArgs {
  if (argv.length === 0 || argv[0] !== "render") {
    throw new UsageError(`expected the "render" command\n${USAGE}`);
  }
  let kind: string | null = null;
  let out: string | null = null;
  const inputs: string[] = [];
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === "--kind" || flag === "--in" || flag === "--out") {
      if (value === undefined) {
        throw new UsageError(`${flag} needs a value\n${USAGE}`);
      }
      if (flag === "--kind") {
        kind = value;
      } else if (flag === "--in") {
        inputs.push(value);
      } else {
        out = value;
      }
      i += 2;
      continue;
    }
    throw new UsageError(`unknown argument "${flag}"\n${USAGE}`);
  }
  if (kind === null) {
    throw new UsageError(`--kind is required\n${USAGE}`);
  }
  if (inputs.length === 0) {
    throw new UsageError(`at least one --in is required\n${USAGE}`);
  }
  if (out === null) {
    throw new UsageError(`--out is required\n${USAGE}`);
  }
  return { kind, inputs, out };
}

class UsageError extends Error {}

/** Run the CLI; returns the process exit code instead of exiting. */
export function main(argv: string[]): number {
  let args: RenderArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n`);
      return EXIT_USAGE;
    }
    throw err;
  }

  const kind = figureKind(args.kind);
  if (kind === null) {
    process.stderr.write(
      `error: unknown figure kind "${args.kind}" (expected one of ${FIGURE_KINDS.join(", ")})\n`,
    );
    return EXIT_USAGE;
  }

  let inputs: FigureInput[];
  try {
    inputs = args.inputs.map((path) => ({
      source: path,
      text: readFileSync(path, "utf8"),
    }));
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return EXIT_DATA;
  }

  let svg: string;
  try {
    svg = buildFigure(kind, inputs);
  } catch (err) {
    if (err instanceof CsvError || err instanceof Error) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return EXIT_DATA;
    }
    throw err;
  }

  try {
    writeFileSync(args.out, svg, "utf8");
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return EXIT_DATA;
  }
  process.stdout.write(`${args.out}\n`);
  return EXIT_OK;
}

const isDirectRun =
  typeof process.argv[1] === "string" &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
