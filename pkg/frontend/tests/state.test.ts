import { describe, expect, test } from "vitest";

import type { Problem, SubmissionRecord } from "../src/api.js";
import { SessionState, TransitionError } from "../src/state.js";

const PROBLEM: Problem = {
  example_id: "demo:demo.py:scale",
  function_name: "scale",
  instruction: { functionality: "f", inputs: "i", outputs: "o" },
  test_set_count: 2,
  code: "def scale(values, factor):\n    ...\n",
};

function record(index: number, passed: boolean): SubmissionRecord {
  return {
    index,
    passed,
    status: passed ? "passed" : "failed_assert",
    failed_set: passed ? null : 0,
    failed_assert: passed ? null : 1,
    error: passed ? null : "assertion failed",
  };
}

function editing(): SessionState {
  const state = new SessionState();
  state.problemLoaded(PROBLEM, "s0001");
  return state;
}

function rateAll(state: SessionState, value: number): void {
  for (const key of Object.keys(state.ratings)) {
    state.setRating(key, value);
  }
}

test("loads into editing with the session attached", () => {
  const state = editing();
  expect(state.phase).toBe("editing");
  expect(state.sessionId).toBe("s0001");
  expect(state.revisions).toBe(0);
});

test("a failed grade returns to editing and counts one revision", () => {
  const state = editing();
  state.submitStarted();
  expect(state.phase).toBe("grading");
  state.submissionGraded(record(0, false));
  expect(state.phase).toBe("editing");
  expect(state.revisions).toBe(1);
});

test("a passing grade moves to rating", () => {
  const state = editing();
  state.submitStarted();
  state.submissionGraded(record(0, true));
  expect(state.phase).toBe("rating");
  expect(state.lastSubmission?.passed).toBe(true);
});

test("submitting while grading is impossible", () => {
  const state = editing();
  state.submitStarted();
  expect(() => state.submitStarted()).toThrow(TransitionError);
});

test("a grading failure is not a revision", () => {
  const state = editing();
  state.submitStarted();
  state.gradingFailed("server unavailable");
  expect(state.phase).toBe("editing");
  expect(state.revisions).toBe(0);
  expect(state.banner).toBe("server unavailable");
  state.submitStarted();
  expect(state.banner).toBeNull(); // cleared on the next attempt
});

test("the server's submission index wins a disagreement", () => {
  const state = editing();
  state.submitStarted();
  state.submissionGraded(record(0, false));
  state.submitStarted();
  // server says this is attempt 0 again: drop our stale local record
  state.submissionGraded(record(0, false));
  expect(state.revisions).toBe(1);
});

test("give up skips to rating", () => {
  const state = editing();
  state.giveUp();
  expect(state.phase).toBe("rating");
  expect(state.gaveUp).toBe(true);
});

test("outcome requires all four ratings", () => {
  const state = editing();
  state.giveUp();
  expect(state.ratingsComplete).toBe(false);
  expect(() => state.outcomePayload()).toThrow(/four ratings/);
  rateAll(state, 3);
  state.setRating("difficulty", 5);
  const payload = state.outcomePayload();
  expect(payload.ratings["difficulty"]).toBe(5);
  expect(payload.gave_up).toBe(true);
  expect(payload.used_external_resources).toBe(false);
});

test("unknown rating keys are rejected", () => {
  const state = editing();
  state.giveUp();
  expect(() => state.setRating("speed", 3)).toThrow(/unknown rating key/);
});

test("recording the outcome closes the session", () => {
  const state = editing();
  state.submitStarted();
  state.submissionGraded(record(0, true));
  rateAll(state, 4);
  state.outcomeRecorded(true);
  expect(state.phase).toBe("done");
  expect(state.solved).toBe(true);
  expect(() => state.setRating("difficulty", 1)).toThrow(TransitionError);
  expect(() => state.submitStarted()).toThrow(TransitionError);
});

test("ratings cannot be set before the rating phase", () => {
  const state = editing();
  expect(() => state.setRating("difficulty", 3)).toThrow(TransitionError);
});
