/**
 * Strict CSV reading for nvnmr artifact files.
 *
 * The backend writes plain comma-separated tables with a single header row,
 * "\n" line endings, and fields that are only quoted when they contain a
 * comma, quote, or newline.  This parser accepts exactly that dialect (plus
 * "\r\n" for robustness) and refuses anything structurally off: ragged rows,
 * unterminated quotes, or a header that does not match the expected schema.
 */

export class CsvError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CsvError";
  }
}

export interface Table {
  /** Column names from the first row, in file order. */
  header: string[];
  /** Data rows as raw string cells; every row has header.length cells. */
  rows: string[][];
}

/** Split one record, honouring double-quoted fields with "" escapes. */
function splitRecord(line: string, lineNo: number, source: string): string[] {
  const cells: string[] = [];
  let cell = "";
  let quoted = false;
  let i = 0;
  while (i < line.length) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cell += '"';
          i += 2;
          continue;
        }
        quoted = false;
        i += 1;
        continue;
      }
      cell += ch;
      i += 1;
      continue;
    }
    if (ch === '"' && cell === "") {
      quoted = true;
      i += 1;
      continue;
    }
    if (ch === ",") {
      cells.push(cell);
      cell = "";
      i += 1;
      continue;
    }
    cell += ch;
    i += 1;
  }
  if (quoted) {
    throw new CsvError(`${source}:${lineNo}: unterminated quoted field`);
  }
  cells.push(cell);
  return cells;
}

/**
 * Parse CSV text into a Table.
 *
 * Every data row must have exactly as many cells as the header; a trailing
 * newline at end of file is tolerated, interior blank lines are not.
 */
export function parseCsv(text: string, source = "<csv>"): Table {
  const normalized = text.replace(/\r\n/g, "\n");
  let body = normalized;
  if (body.endsWith("\n")) {
    body = body.slice(0, -1);
  }
  if (body === "") {
    throw new CsvError(`${source}: empty file`);
  }
  const lines = body.split("\n");
  const header = splitRecord(lines[0], 1, source);
  if (header.some((name) => name === "")) {
    throw new CsvError(`${source}:1: blank column name in header`);
  }
  const rows: string[][] = [];
  for (let k = 1; k < lines.length; k += 1) {
    const lineNo = k + 1;
    if (lines[k] === "") {
      throw new CsvError(`${source}:${lineNo}: blank line inside table`);
    }
    const cells = splitRecord(lines[k], lineNo, source);
    if (cells.length !== header.length) {
      throw new CsvError(
        `${source}:${lineNo}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    rows.push(cells);
  }
  return { header, rows };
}

/**
 * Assert that the table carries exactly the expected columns, in order.
 *
 * Artifact schemas are part of the CLI contract, so a renamed or reordered
 * column means the file is not the kind of artifact the caller thinks it is.
 */
export function requireColumns(
  table: Table,
  expected: readonly string[],
  source = "<csv>",
): void {
  const got = table.header.join(",");
  const want = expected.join(",");
  if (got !== want) {
    throw new CsvError(`${source}: header is "${got}", expected "${want}"`);
  }
}

/** Parse a required numeric cell; empty cells and garbage are errors. */
export function numericCell(
  value: string,
  column: string,
  rowIndex: number,
  source = "<csv>",
): number {
  if (value.trim() === "") {
    throw new CsvError(
      `${source}: row ${rowIndex + 1}: empty value in column "${column}"`,
    );
  }
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new CsvError(
      `${source}: row ${rowIndex + 1}: "${value}" in column "${column}" is not a finite number`,
    );
  }
  return parsed;
}

/** Index of a column that requireColumns has already vetted. */
export function columnIndex(table: Table, column: string): number {
  const index = table.header.indexOf(column);
  if (index < 0) {
    throw new CsvError(`missing column "${column}"`);
  }
  return index;
}
