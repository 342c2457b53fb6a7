/**
 * Deterministic SVG line charts.
 *
 * Everything is computed from the data and spec alone (no timestamps, no
 * randomness, no locale-dependent formatting), so rendering the same inputs
 * twice yields byte-identical SVG text.  The output is a self-contained
 * <svg> element with axes, tick labels, gridlines, one polyline per series,
 * and a legend.
 */

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
  /** CSS color for the stroke (and marker fill). */
  color: string;
  /** SVG stroke-dasharray, e.g. "6 4"; omit for a solid line. */
  dash?: string;
  /** Draw a small circle at each data point. */
  markers?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yScale?: "linear" | "log";
  width?: number;
  height?: number;
}

const MARGIN = { top: 42, right: 24, bottom: 52, left: 72 } as const;
const LEGEND_LINE = 18;

/** Format an axis value compactly without locale effects. */
export function formatTick(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e5 || magnitude < 1e-3) {
    return value.toExponential(1).replace("e+", "e");
  }
  // Up to 6 significant digits, then strip trailing zeros.
  let text = value.toPrecision(6);
  if (text.includes(".")) {
    text = text.replace(/0+$/, "").replace(/\.$/, "");
  }
  return text;
}

function niceStep(rough: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(rough)));
  const fraction = rough / power;
  let nice: number;
  if (fraction <= 1) {
    nice = 1;
  } else if (fraction <= 2) {
    nice = 2;
  } else if (fraction <= 5) {
    nice = 5;
  } else {
    nice = 10;
  }
  return nice * power;
}

/** Tick positions covering [lo, hi] at a round step, endpoints padded out. */
export function linearTicks(lo: number, hi: number, maxTicks = 6): number[] {
  if (lo === hi) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const step = niceStep((hi - lo) / Math.max(1, maxTicks - 1));
  const start = Math.floor(lo / step) * step;
  const ticks: number[] = [];
  // Guard against FP drift pushing the last tick just past hi.
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Powers of ten spanning [lo, hi]; lo must be positive. */
export function logTicks(lo: number, hi: number): number[] {
  const first = Math.floor(Math.log10(lo));
  const last = Math.ceil(Math.log10(hi));
  const ticks: number[] = [];
  for (let e = first; e <= last; e += 1) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed-width coordinate so output does not depend on FP print quirks. */
function coord(value: number): string {
  return value.toFixed(2);
}

interface Scale {
  (value: number): number;
}

function makeScale(
  domainLo: number,
  domainHi: number,
  rangeLo: number,
  rangeHi: number,
  log: boolean,
): Scale {
  if (log) {
    const llo = Math.log10(domainLo);
    const lhi = Math.log10(domainHi);
    const span = lhi - llo || 1;
    return (v) => rangeLo + ((Math.log10(v) - llo) / span) * (rangeHi - rangeLo);
  }
  const span = domainHi - domainLo || 1;
  return (v) => rangeLo + ((v - domainLo) / span) * (rangeHi - rangeLo);
}

/** Render the chart spec to SVG text. */
export function renderChart(spec: ChartSpec): string {
  if (spec.series.length === 0) {
    throw new Error("chart needs at least one series");
  }
  const allPoints = spec.series.flatMap((s) => s.points);
  if (allPoints.length === 0) {
    throw new Error("chart needs at least one data point");
  }
  const log = spec.yScale === "log";
  if (log && allPoints.some((p) => p.y <= 0)) {
    throw new Error("log scale requires positive y values");
  }

  const width = spec.width ?? 640;
  const height = spec.height ?? 420;
  const plotL = MARGIN.left;
  const plotR = width - MARGIN.right;
  const plotT = MARGIN.top;
  const plotB = height - MARGIN.bottom;

  const xs = allPoints.map((p) => p.x);
  const ys = allPoints.map((p) => p.y);
  const xTicks = linearTicks(Math.min(...xs), Math.max(...xs));
  const yTicks = log
    ? logTicks(Math.min(...ys), Math.max(...ys))
    : linearTicks(Math.min(...ys), Math.max(...ys));

  const xScale = makeScale(
    xTicks[0],
    xTicks[xTicks.length - 1],
    plotL,
    plotR,
    false,
  );
  const yScale = makeScale(
    yTicks[0],
    yTicks[yTicks.length - 1],
    plotB,
    plotT,
    log,
  );

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${coord(width / 2)}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15" font-weight="bold">${escapeXml(spec.title)}</text>`,
  );

  // Gridlines and tick labels.
  for (const t of yTicks) {
    const y = coord(yScale(t));
    parts.push(
      `<line x1="${coord(plotL)}" y1="${y}" x2="${coord(plotR)}" y2="${y}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${coord(plotL - 8)}" y="${y}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">${escapeXml(formatTick(t))}</text>`,
    );
  }
  for (const t of xTicks) {
    const x = coord(xScale(t));
    parts.push(
      `<line x1="${x}" y1="${coord(plotT)}" x2="${x}" y2="${coord(plotB)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x}" y="${coord(plotB + 18)}" text-anchor="middle" font-family="sans-serif" font-size="11">${escapeXml(formatTick(t))}</text>`,
    );
  }

  // Axes on top of the grid.
  parts.push(
    `<line x1="${coord(plotL)}" y1="${coord(plotB)}" x2="${coord(plotR)}" y2="${coord(plotB)}" stroke="black" stroke-width="1.5"/>`,
  );
  parts.push(
    `<line x1="${coord(plotL)}" y1="${coord(plotT)}" x2="${coord(plotL)}" y2="${coord(plotB)}" stroke="black" stroke-width="1.5"/>`,
  );
  parts.push(
    `<text x="${coord((plotL + plotR) / 2)}" y="${coord(height - 14)}" text-anchor="middle" font-family="sans-serif" font-size="13">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${coord((plotT + plotB) / 2)}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${coord((plotT + plotB) / 2)})">${escapeXml(spec.yLabel)}</text>`,
  );

  // Data series.
  for (const series of spec.series) {
    const pts = series.points
      .map((p) => `${coord(xScale(p.x))},${coord(yScale(p.y))}`)
      .join(" ");
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${series.color}" stroke-width="2"${dash}/>`,
    );
    if (series.markers) {
      for (const p of series.points) {
        parts.push(
          `<circle cx="${coord(xScale(p.x))}" cy="${coord(yScale(p.y))}" r="3" fill="${series.color}"/>`,
        );
      }
    }
  }

  // Legend, top-right inside the plot area.
  const legendX = plotR - 150;
  let legendY = plotT + 12;
  for (const series of spec.series) {
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    parts.push(
      `<line x1="${coord(legendX)}" y1="${coord(legendY)}" x2="${coord(legendX + 26)}" y2="${coord(legendY)}" stroke="${series.color}" stroke-width="2"${dash}/>`,
    );
    parts.push(
      `<text x="${coord(legendX + 32)}" y="${coord(legendY)}" dominant-baseline="middle" font-family="sans-serif" font-size="12">${escapeXml(series.label)}</text>`,
    );
    legendY += LEGEND_LINE;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
