import { execFileSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { AnnotationSession } from "../src/annotations.js";

const TYPES = ["city", "email", "null"];
const TARGETS = [
  { table: "t1", column: 0 },
  { table: "t1", column: 1 },
  { table: "t2", column: 0 },
];

describe("AnnotationSession", () => {
  it("tracks progress toward the configured targets", () => {
    const s = new AnnotationSession("w1", TYPES, TARGETS);
    expect(s.progress()).toEqual({ done: 0, total: 3 });
    s.setLabel(TARGETS[0], "city");
    s.setLabel(TARGETS[1], "null");
    expect(s.progress()).toEqual({ done: 2, total: 3 });
    expect(s.complete).toBe(false);
    s.setLabel(TARGETS[2], "email");
    expect(s.complete).toBe(true);
  });

  it("rejects labels outside the configured type list", () => {
    const s = new AnnotationSession("w1", TYPES, TARGETS);
    expect(() => s.setLabel(TARGETS[0], "made-up")).toThrow(/type list/);
  });

  it("relabeling a column overwrites instead of duplicating", () => {
    const s = new AnnotationSession("w1", TYPES, TARGETS);
    s.setLabel(TARGETS[0], "city");
    s.setLabel(TARGETS[0], "email");
    expect(s.exportJsonl().split("\n")).toHaveLength(1);
    expect(s.getLabel(TARGETS[0])).toBe("email");
  });

  it("exports one JSON object per line in the service's annotation format", () => {
    const s = new AnnotationSession("w7", TYPES, TARGETS);
    s.setLabel(TARGETS[2], "email");
    s.setLabel(TARGETS[0], "city");
    const lines = s.exportJsonl().split("\n").map((l) => JSON.parse(l));
    expect(lines).toEqual([
      { worker: "w7", table: "t1", column: 0, label: "city" },
      { worker: "w7", table: "t2", column: 0, label: "email" },
    ]);
  });

  it("export is accepted by the backend aggregation tool", () => {
    const s = new AnnotationSession("w1", TYPES, TARGETS);
    for (const t of TARGETS) s.setLabel(t, "city");
    const dir = mkdtempSync(join(tmpdir(), "annotations-"));
    const path = join(dir, "export.jsonl");
    writeFileSync(path, s.exportJsonl() + "\n");
    const out = execFileSync(
      "python3",
      ["-m", "adatyper.cli", "aggregate-annotations", path, "--no-filter"],
      { encoding: "utf-8" },
    );
    const rows = out.trim().split("\n").map((l) => JSON.parse(l));
    expect(rows).toEqual([
      { table: "t1", column: 0, type: "city" },
      { table: "t1", column: 1, type: "city" },
      { table: "t2", column: 0, type: "city" },
    ]);
  });
});
