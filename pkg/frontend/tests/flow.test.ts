// End-to-end flow against the real backend: serve_fixture.py hosts the frozen
// replay dataset with the fake execution shim, and the browser-side client
// drives it over HTTP exactly as the page would.
import { afterAll, beforeAll, expect, test } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { RATING_KEYS, StudyClient, type Outcome } from "../src/api.js";
import { prefillEditor } from "../src/prefill.js";

const HERE = dirname(fileURLToPath(import.meta.url));

let server: ChildProcess | undefined;
let client: StudyClient;
let logPath: string;
let solutions: Record<string, string>;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function waitForPort(child: ChildProcess): Promise<number> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error("server did not report a port")),
      30_000,
    );
    child.stdout!.on("data", (chunk: Buffer) => {
      buffer += String(chunk);
      if (buffer.includes("\n")) {
        clearTimeout(timer);
        resolve(JSON.parse(buffer.split("\n")[0]!).port as number);
      }
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early with code ${code}`));
    });
  });
}

function outcome(value: number, gaveUp: boolean): Outcome {
  return {
    ratings: Object.fromEntries(RATING_KEYS.map((key) => [key, value])),
    used_external_resources: false,
    gave_up: gaveUp,
  };
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "study-flow-"));
  logPath = join(dir, "sessions.jsonl");
  const solutionsPath = join(dir, "solutions.json");
  server = spawn(
    "python3",
    [
      join(HERE, "serve_fixture.py"),
      "--log",
      logPath,
      "--solutions-out",
      solutionsPath,
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stderr!.on("data", () => {}); // keep the pipe drained
  const port = await waitForPort(server);
  client = new StudyClient(`http://127.0.0.1:${port}`);
  for (let attempt = 0; ; attempt += 1) {
    try {
      await client.health();
      break;
    } catch (err) {
      if (attempt > 100) throw err;
      await sleep(100);
    }
  }
  solutions = JSON.parse(readFileSync(solutionsPath, "utf-8"));
}, 60_000);

afterAll(() => {
  server?.kill();
});

test(
  "a participant recovers from a failing attempt and rates the problem",
  async () => {
    const problems = await client.listProblems();
    expect(problems.length).toBeGreaterThanOrEqual(8);
    const exampleId = problems[0]!.example_id;
    const problem = await client.getProblem(exampleId);
    const sessionId = await client.startSession("p1", exampleId);

    // the editor starts from the served header; break the body on purpose
    const prefill = prefillEditor(problem.code, problem.function_name);
    const wrong = prefill.text.replace("...", "return None");
    const first = await client.submitCode(sessionId, wrong);
    expect(first.index).toBe(0);
    expect(first.passed).toBe(false);
    expect(first.failed_set).toBe(0);

    const second = await client.submitCode(sessionId, solutions[exampleId]!);
    expect(second.index).toBe(1);
    expect(second.passed).toBe(true);
    expect(second.status).toBe("passed");

    const solved = await client.recordOutcome(sessionId, outcome(4, false));
    expect(solved).toBe(true);

    const events = readFileSync(logPath, "utf-8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line));
    const mine = events.filter((e) => e.data.session_id === sessionId);
    const graded = mine.filter((e) => e.event === "submission_graded");
    expect(graded).toHaveLength(2);
    expect(graded[0]!.data.passed).toBe(false);
    expect(graded[1]!.data.passed).toBe(true);
    const closing = mine.find((e) => e.event === "outcome_recorded")!;
    expect(closing.data.solved).toBe(true);
    expect(closing.data.submissions).toBe(2);
    expect(Object.keys(closing.data.ratings).sort()).toEqual(
      [...RATING_KEYS].sort(),
    );
  },
  120_000,
);

test(
  "the cohort summary reports 13 of 16 sessions solved",
  async () => {
    const problems = await client.listProblems();
    for (let i = 0; i < 12; i += 1) {
      const exampleId = problems[i % problems.length]!.example_id;
      const sid = await client.startSession(`solver-${i}`, exampleId);
      const record = await client.submitCode(sid, solutions[exampleId]!);
      expect(record.passed).toBe(true);
      await client.recordOutcome(sid, outcome(3, false));
    }
    for (let i = 0; i < 3; i += 1) {
      const exampleId = problems[i]!.example_id;
      const sid = await client.startSession(`quitter-${i}`, exampleId);
      await client.recordOutcome(sid, outcome(2, true));
    }

    const summary = await client.summary();
    expect(summary.sessions).toBe(16);
    expect(summary.closed).toBe(16);
    expect(summary.solved).toBe(13);
    expect(summary.solve_rate).toBe(0.8125);
    expect(summary.gave_up_rate).toBe(3 / 16);
  },
  300_000,
);
