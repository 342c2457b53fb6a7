import { describe, expect, it } from "vitest";
import {
  CsvError,
  columnIndex,
  numericCell,
  parseCsv,
  requireColumns,
} from "../src/csv.js";

describe("parseCsv", () => {
  it("reads a plain table with a trailing newline", () => {
    const table = parseCsv("a,b\n1,2\n3,4\n");
    expect(table.header).toEqual(["a", "b"]);
    expect(table.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("accepts CRLF line endings", () => {
    const table = parseCsv("a,b\r\n1,2\r\n");
    expect(table.rows).toEqual([["1", "2"]]);
  });

  it("handles quoted cells with commas and escaped quotes", () => {
    const table = parseCsv('a,b\n"x, y","he said ""hi"""\n');
    expect(table.rows).toEqual([["x, y", 'he said "hi"']]);
  });

  it("keeps empty cells", () => {
    const table = parseCsv("a,b,c\n1,,3\n");
    expect(table.rows).toEqual([["1", "", "3"]]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(CsvError);
    expect(() => parseCsv("a,b\n1\n")).toThrow(/expected 2 cells/);
  });

  it("rejects empty input and blank interior lines", () => {
    expect(() => parseCsv("")).toThrow(/empty file/);
    expect(() => parseCsv("a,b\n1,2\n\n3,4\n")).toThrow(/blank line/);
  });

  it("rejects an unterminated quote", () => {
    expect(() => parseCsv('a\n"oops\n')).toThrow(/unterminated/);
  });

  it("a header-only file parses to zero rows", () => {
    const table = parseCsv("a,b\n");
    expect(table.rows).toEqual([]);
  });
});

describe("requireColumns", () => {
  it("accepts an exact match and rejects everything else", () => {
    const table = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(table, ["a", "b"])).not.toThrow();
    expect(() => requireColumns(table, ["b", "a"])).toThrow(CsvError);
    expect(() => requireColumns(table, ["a"])).toThrow(/expected "a"/);
    expect(() => requireColumns(table, ["a", "b", "c"])).toThrow(CsvError);
  });
});

describe("numericCell", () => {
  it("parses floats in repr form", () => {
    expect(numericCell("3.194677012397453", "t", 0)).toBeCloseTo(3.1946770123, 9);
    expect(numericCell("1e-06", "t", 0)).toBe(1e-6);
    expect(numericCell("-2.5", "t", 0)).toBe(-2.5);
  });

  it("rejects blanks, text, and non-finite values", () => {
    expect(() => numericCell("", "t", 4)).toThrow(/row 5/);
    expect(() => numericCell("abc", "t", 0)).toThrow(CsvError);
    expect(() => numericCell("Infinity", "t", 0)).toThrow(/finite/);
  });
});

describe("columnIndex", () => {
  it("finds columns and flags missing ones", () => {
    const table = parseCsv("x,y\n1,2\n");
    expect(columnIndex(table, "y")).toBe(1);
    expect(() => columnIndex(table, "z")).toThrow(CsvError);
  });
});
