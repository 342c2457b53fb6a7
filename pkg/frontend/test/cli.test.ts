import { existsSync, mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it, vi } from "vitest";
import { EXIT_DATA, EXIT_OK, EXIT_USAGE, main } from "../src/cli.js";

const TESTDATA = fileURLToPath(new URL("../testdata", import.meta.url));
const OUT_DIR = mkdtempSync(join(tmpdir(), "nvnmr-figures-"));

afterAll(() => {
  rmSync(OUT_DIR, { recursive: true, force: true });
});

function render(kind: string, files: string[], out: string): number {
  const argv = ["render", "--kind", kind];
  for (const file of files) {
    argv.push("--in", join(TESTDATA, file));
  }
  argv.push("--out", out);
  return main(argv);
}

describe("render command", () => {
  it.each([
    ["envelope", "envelope.csv"],
    ["spectrum", "spectrum.csv"],
    ["time_vs_distance", "time_vs_distance.csv"],
    ["time_vs_t2", "time_vs_t2.csv"],
  ])("renders %s to an SVG file", (kind, file) => {
    const out = join(OUT_DIR, `${kind}.svg`);
    expect(render(kind, [file], out)).toBe(EXIT_OK);
    expect(existsSync(out)).toBe(true);
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
  });

  it("writes identical bytes across repeat runs", () => {
    const first = join(OUT_DIR, "repeat-1.svg");
    const second = join(OUT_DIR, "repeat-2.svg");
    expect(render("spectrum", ["spectrum.csv"], first)).toBe(EXIT_OK);
    expect(render("spectrum", ["spectrum.csv"], second)).toBe(EXIT_OK);
    expect(readFileSync(first, "utf8")).toBe(readFileSync(second, "utf8"));
  });

  it("fails with a data error on a corrupted header", () => {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    const out = join(OUT_DIR, "corrupt.svg");
    expect(render("spectrum", ["corrupted_header.csv"], out)).toBe(EXIT_DATA);
    expect(existsSync(out)).toBe(false);
    expect(stderr.mock.calls.map((c) => String(c[0])).join("")).toMatch(/bogus_hz/);
    stderr.mockRestore();
  });

  it("fails with a data error when the file does not exist", () => {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    expect(render("spectrum", ["missing.csv"], join(OUT_DIR, "x.svg"))).toBe(EXIT_DATA);
    stderr.mockRestore();
  });

  it("fails with a data error when the schema belongs to another kind", () => {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    expect(render("envelope", ["spectrum.csv"], join(OUT_DIR, "y.svg"))).toBe(EXIT_DATA);
    stderr.mockRestore();
  });
});

describe("usage errors", () => {
  function quiet(argv: string[]): number {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    try {
      return main(argv);
    } finally {
      stderr.mockRestore();
    }
  }

  it("rejects a missing or unknown command", () => {
    expect(quiet([])).toBe(EXIT_USAGE);
    expect(quiet(["plot"])).toBe(EXIT_USAGE);
  });

  it("rejects missing flags", () => {
    expect(quiet(["render"])).toBe(EXIT_USAGE);
    expect(quiet(["render", "--kind", "spectrum"])).toBe(EXIT_USAGE);
    expect(quiet(["render", "--kind", "spectrum", "--in", "a.csv"])).toBe(EXIT_USAGE);
    expect(quiet(["render", "--in", "a.csv", "--out", "a.svg"])).toBe(EXIT_USAGE);
  });

  it("rejects a flag without a value and unknown flags", () => {
    expect(quiet(["render", "--kind"])).toBe(EXIT_USAGE);
    expect(quiet(["render", "--kind", "spectrum", "--wat", "1"])).toBe(EXIT_USAGE);
  });

  it("rejects an unknown figure kind", () => {
    expect(
      quiet(["render", "--kind", "pie", "--in", "a.csv", "--out", "a.svg"]),
    ).toBe(EXIT_USAGE);
  });
});
