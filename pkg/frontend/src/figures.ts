/**
 * Figure definitions over nvnmr CSV artifacts.
 *
 * Each figure kind binds one CSV schema to a chart layout with axis labels
 * in human units.  Inputs arrive as already-read text so this module stays
 * free of filesystem concerns; the CLI handles reading and writing.
 */

import {
  CsvError,
  columnIndex,
  numericCell,
  parseCsv,
  requireColumns,
  type Table,
} from "./csv.js";
import { renderChart, type ChartSpec, type Series } from "./chart.js";

export const FIGURE_KINDS = [
  "envelope",
  "spectrum",
  "time_vs_distance",
  "time_vs_t2",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureInput {
  /** Path or label for error messages and series naming. */
  source: string;
  /** Raw CSV text. */
  text: string;
}

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

const ENVELOPE_COLUMNS = ["t_p_s", "s_off", "s_on"] as const;
const SPECTRUM_COLUMNS = ["omega_hz", "s_on", "s_off", "delta_s"] as const;
const DISTANCE_COLUMNS = [
  "distance_nm",
  "best_time_s",
  "best_b_nmr_t",
  "best_t_p_s",
  "error",
] as const;
const T2_COLUMNS = [
  "t2_nv_ms",
  "best_time_s",
  "best_b_nmr_t",
  "best_t_p_s",
  "error",
] as const;

function baseName(source: string): string {
  const tail = source.split("/").pop() ?? source;
  return tail.replace(/\.csv$/i, "");
}

function parseInput(input: FigureInput, columns: readonly string[]): Table {
  const table = parseCsv(input.text, input.source);
  requireColumns(table, columns, input.source);
  if (table.rows.length === 0) {
    throw new CsvError(`${input.source}: no data rows`);
  }
  return table;
}

function requireSingleInput(kind: FigureKind, inputs: FigureInput[]): FigureInput {
  if (inputs.length !== 1) {
    throw new CsvError(`figure "${kind}" takes exactly one input CSV, got ${inputs.length}`);
  }
  return inputs[0];
}

/** Free precession envelope: undriven and driven signal against pulse time. */
function envelopeFigure(inputs: FigureInput[]): ChartSpec {
  const input = requireSingleInput("envelope", inputs);
  const table = parseInput(input, ENVELOPE_COLUMNS);
  const undriven: Series = {
    label: "undriven",
    color: "#1f77b4",
    points: [],
  };
  const driven: Series = {
    label: "driven",
    color: "#d62728",
    dash: "6 4",
    points: [],
  };
  table.rows.forEach((row, i) => {
    const tMs = numericCell(row[0], "t_p_s", i, input.source) * 1e3;
    undriven.points.push({ x: tMs, y: numericCell(row[1], "s_off", i, input.source) });
    driven.points.push({ x: tMs, y: numericCell(row[2], "s_on", i, input.source) });
  });
  return {
    title: "Echo signal envelope",
    xLabel: "pulse time [ms]",
    yLabel: "signal S",
    series: [undriven, driven],
  };
}

/** Drive-frequency sweep; several CSVs overlay as separately labelled traces. */
function spectrumFigure(inputs: FigureInput[]): ChartSpec {
  if (inputs.length === 0) {
    throw new CsvError('figure "spectrum" needs at least one input CSV');
  }
  const series: Series[] = inputs.map((input, n) => {
    const table = parseInput(input, SPECTRUM_COLUMNS);
    const omegaIdx = columnIndex(table, "omega_hz");
    const deltaIdx = columnIndex(table, "delta_s");
    return {
      label: baseName(input.source),
      color: SERIES_COLORS[n % SERIES_COLORS.length],
      points: table.rows.map((row, i) => ({
        x: numericCell(row[omegaIdx], "omega_hz", i, input.source) * 1e-3,
        y: numericCell(row[deltaIdx], "delta_s", i, input.source),
      })),
    };
  });
  return {
    title: "Signal contrast spectrum",
    xLabel: "drive frequency [kHz]",
    yLabel: "ΔS",
    series,
  };
}

/**
 * Detection-time scan: one marker-lined trace on a log time axis.
 *
 * Rows whose error cell is non-empty mark scan points with no detectable
 * signal; they carry no timing numbers and are skipped, not treated as
 * corrupt data.
 */
function scanFigure(
  inputs: FigureInput[],
  kind: FigureKind,
  columns: readonly string[],
  xLabel: string,
  title: string,
): ChartSpec {
  const input = requireSingleInput(kind, inputs);
  const table = parseInput(input, columns);
  const errorIdx = columnIndex(table, "error");
  const timeIdx = columnIndex(table, "best_time_s");
  const points = table.rows
    .map((row, i) => ({ row, i }))
    .filter(({ row }) => row[errorIdx] === "")
    .map(({ row, i }) => ({
      x: numericCell(row[0], columns[0], i, input.source),
      y: numericCell(row[timeIdx], "best_time_s", i, input.source),
    }));
  if (points.length === 0) {
    throw new CsvError(`${input.source}: every scan point failed; nothing to plot`);
  }
  return {
    title,
    xLabel,
    yLabel: "detection time [s]",
    yScale: "log",
    series: [
      {
        label: "minimum total time",
        color: "#1f77b4",
        markers: true,
        points,
      },
    ],
  };
}

/** Build the SVG for a figure kind from its input CSVs. */
export function buildFigure(kind: FigureKind, inputs: FigureInput[]): string {
  switch (kind) {
    case "envelope":
      return renderChart(envelopeFigure(inputs));
    case "spectrum":
      return renderChart(spectrumFigure(inputs));
    case "time_vs_distance":
      return renderChart(
        scanFigure(
          inputs,
          "time_vs_distance",
          DISTANCE_COLUMNS,
          "target distance [nm]",
          "Detection time vs distance",
        ),
      );
    case "time_vs_t2":
      return renderChart(
        scanFigure(
          inputs,
          "time_vs_t2",
          T2_COLUMNS,
          "sensor T2 [ms]",
          "Detection time vs sensor T2",
        ),
      );
  }
}

/** Narrow an arbitrary string to a FigureKind, or return null. */
export function figureKind(name: string): FigureKind | null {
  return (FIGURE_KINDS as readonly string[]).includes(name)
    ? (name as FigureKind)
    : null;
}
