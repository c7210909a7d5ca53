// Session state machine for one participant working one problem. The view
// renders whatever phase this reports; every transition is funnelled through
// a single method so "submit while grading" and similar races are impossible
// to express rather than merely discouraged.

import type { Problem, SubmissionRecord } from "./api.js";
import { RATING_KEYS } from "./api.js";
import { validRatings } from "./prefill.js";

export type Phase = "loading" | "editing" | "grading" | "rating" | "done";

export class TransitionError extends Error {
  constructor(event: string, phase: Phase) {
    super(`${event} is not allowed while ${phase}`);
    this.name = "TransitionError";
  }
}

export class SessionState {
  phase: Phase = "loading";
  problem: Problem | null = null;
  sessionId: string | null = null;
  submissions: SubmissionRecord[] = [];
  ratings: Record<string, number | null>;
  usedExternalResources = false;
  gaveUp = false;
  solved: boolean | null = null;
  banner: string | null = null;

  constructor() {
    this.ratings = Object.fromEntries(RATING_KEYS.map((key) => [key, null]));
  }

  private expect(event: string, ...phases: Phase[]): void {
    if (!phases.includes(this.phase)) {
      throw new TransitionError(event, this.phase);
    }
  }

  get revisions(): number {
    return this.submissions.length;
  }

  get lastSubmission(): SubmissionRecord | null {
    return this.submissions.length
      ? this.submissions[this.submissions.length - 1]!
      : null;
  }

  problemLoaded(problem: Problem, sessionId: string): void {
    this.expect("problemLoaded", "loading");
    this.problem = problem;
    this.sessionId = sessionId;
    this.phase = "editing";
  }

  submitStarted(): void {
    this.expect("submit", "editing");
    this.banner = null;
    this.phase = "grading";
  }

  submissionGraded(record: SubmissionRecord): void {
    this.expect("submissionGraded", "grading");
    // trust the server's index over our own count if they ever disagree
    if (record.index !== this.submissions.length) {
      this.submissions.length = record.index;
    }
    this.submissions.push(record);
    this.phase = record.passed ? "rating" : "editing";
  }

  gradingFailed(message: string): void {
    this.expect("gradingFailed", "grading");
    // not counted as a revision: the attempt never reached the grader
    this.banner = message;
    this.phase = "editing";
  }

  giveUp(): void {
    this.expect("giveUp", "editing");
    this.gaveUp = true;
    this.phase = "rating";
  }

  setRating(key: string, value: number): void {
    this.expect("setRating", "rating");
    if (!(key in this.ratings)) {
      throw new Error(`unknown rating key: ${key}`);
    }
    this.ratings[key] = value;
  }

  get ratingsComplete(): boolean {
    return validRatings(this.ratings, RATING_KEYS);
  }

  outcomePayload(): {
    ratings: Record<string, number>;
    used_external_resources: boolean;
    gave_up: boolean;
  } {
    this.expect("recordOutcome", "rating");
    if (!this.ratingsComplete) {
      throw new Error("all four ratings are required");
    }
    return {
      ratings: Object.fromEntries(
        Object.entries(this.ratings).map(([k, v]) => [k, v as number]),
      ),
      used_external_resources: this.usedExternalResources,
      gave_up: this.gaveUp,
    };
  }

  outcomeRecorded(solved: boolean): void {
    this.expect("outcomeRecorded", "rating");
    this.solved = solved;
    this.phase = "done";
  }
}
