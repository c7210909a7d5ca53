// Pure helpers for preparing the editor from a served problem. The server
// blanks the target function's body to a lone `...` line; the editor starts
// from the function's header and instruction docstring so a submission
// redefines the function and the grader can splice its body back in.

export interface PrefillResult {
  text: string;
  slotLine: number;
}

function indentWidth(line: string): number {
  return line.length - line.trimStart().length;
}

/** Index of the line holding the blanked body, or -1. */
export function findSlotLine(code: string): number {
  const lines = code.split("\n");
  return lines.findIndex((line) => line.trim() === "...");
}

function findDefLine(lines: string[], functionName: string): number {
  // a dotted name like Class.method defines only its last segment
  const terminal = functionName.split(".").pop()!;
  const needle = `def ${terminal}(`;
  return lines.findIndex((line) => line.trimStart().startsWith(needle));
}

function dedent(lines: string[]): string[] {
  const widths = lines
    .filter((line) => line.trim() !== "")
    .map((line) => indentWidth(line));
  const common = widths.length ? Math.min(...widths) : 0;
  return lines.map((line) => (line.trim() === "" ? "" : line.slice(common)));
}

/**
 * Editor contents for a problem: the target function from its `def` line
 * through the `...` slot, dedented so a method target parses standalone.
 * Throws if the served code has no recognisable slot.
 */
export function prefillEditor(code: string, functionName: string): PrefillResult {
  const lines = code.split("\n");
  const start = findDefLine(lines, functionName);
  if (start < 0) {
    throw new Error(`no definition of ${functionName} in served code`);
  }
  const slot = lines.findIndex(
    (line, i) => i > start && line.trim() === "...",
  );
  if (slot < 0) {
    throw new Error("served code has no body slot");
  }
  const block = dedent(lines.slice(start, slot + 1));
  const slotInBlock = block.findIndex((line) => line.trim() === "...");
  return { text: block.join("\n") + "\n", slotLine: slotInBlock };
}

/** Ratings are whole numbers 1..5 for every key; anything else blocks submit. */
export function validRatings(
  ratings: Record<string, number | null>,
  keys: readonly string[],
): boolean {
  return keys.every((key) => {
    const value = ratings[key];
    return (
      typeof value === "number" && Number.isInteger(value) && value >= 1 && value <= 5
    );
  });
}

export type SetRow =
  | { kind: "passed" }
  | { kind: "not_run" }
  | { kind: "failed"; status: string; failedAssert: number | null; error: string | null };

/**
 * One row per hidden test set, derived from the grading record. Sets run in
 * order and stop at the first failure, so everything before `failed_set`
 * passed and everything after it never ran.
 */
export function setRows(
  testSetCount: number,
  record: {
    passed: boolean;
    status: string;
    failed_set: number | null;
    failed_assert: number | null;
    error: string | null;
  },
): SetRow[] {
  const rows: SetRow[] = [];
  for (let i = 0; i < testSetCount; i += 1) {
    if (record.passed) {
      rows.push({ kind: "passed" });
    } else if (record.failed_set === null) {
      rows.push({ kind: "not_run" });
    } else if (i < record.failed_set) {
      rows.push({ kind: "passed" });
    } else if (i === record.failed_set) {
      rows.push({
        kind: "failed",
        status: record.status,
        failedAssert: record.failed_assert,
        error: record.error,
      });
    } else {
      rows.push({ kind: "not_run" });
    }
  }
  return rows;
}
