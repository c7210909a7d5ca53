// Typed client for the study server's HTTP API. All methods validate the
// response shape before returning it: a malformed payload throws, so callers
// never render (or count) garbage.

export interface ProblemSummary {
  example_id: string;
  function_name: string;
}

export interface Instruction {
  functionality: string;
  inputs: string;
  outputs: string;
}

export interface Problem {
  example_id: string;
  function_name: string;
  instruction: Instruction;
  test_set_count: number;
  code: string;
}

export interface SubmissionRecord {
  index: number;
  passed: boolean;
  status: string;
  failed_set: number | null;
  failed_assert: number | null;
  error: string | null;
}

export interface Outcome {
  ratings: Record<string, number>;
  used_external_resources: boolean;
  gave_up: boolean;
}

export interface Summary {
  sessions: number;
  closed: number;
  solved: number;
  solve_rate: number;
  first_submission_solve_rate: number;
  revisions_histogram: Record<string, number>;
  accuracy_by_revision: number[];
  external_resource_rate: number;
  gave_up_rate: number;
  mean_ratings: Record<string, number>;
}

export const RATING_KEYS = [
  "difficulty",
  "instruction_clarity",
  "test_agreement",
  "code_naturalness",
] as const;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function need(value: unknown, field: string, kind: string): void {
  if (typeof value !== kind) {
    throw new ApiError(`malformed response: ${field} should be ${kind}`);
  }
}

function needNullable(value: unknown, field: string, kind: string): void {
  if (value !== null && typeof value !== kind) {
    throw new ApiError(`malformed response: ${field} should be ${kind} or null`);
  }
}

export class StudyClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`request failed: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(detail, response.status);
    }
    if (body === null || typeof body !== "object") {
      throw new ApiError("malformed response: not a JSON object");
    }
    return body;
  }

  private post(path: string, payload: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async health(): Promise<void> {
    const body = (await this.request("/health")) as { status?: unknown };
    if (body.status !== "ok") {
      throw new ApiError("server unhealthy");
    }
  }

  async listProblems(): Promise<ProblemSummary[]> {
    const body = (await this.request("/problems")) as { problems?: unknown };
    if (!Array.isArray(body.problems)) {
      throw new ApiError("malformed response: problems should be a list");
    }
    for (const entry of body.problems) {
      need(entry?.example_id, "example_id", "string");
      need(entry?.function_name, "function_name", "string");
    }
    return body.problems as ProblemSummary[];
  }

  async getProblem(exampleId: string): Promise<Problem> {
    const body = (await this.request(
      `/problems/${encodeURI(exampleId)}`,
    )) as Record<string, unknown>;
    need(body.example_id, "example_id", "string");
    need(body.function_name, "function_name", "string");
    need(body.test_set_count, "test_set_count", "number");
    need(body.code, "code", "string");
    const instruction = body.instruction as Record<string, unknown> | undefined;
    need(instruction?.functionality, "instruction.functionality", "string");
    need(instruction?.inputs, "instruction.inputs", "string");
    need(instruction?.outputs, "instruction.outputs", "string");
    return body as unknown as Problem;
  }

  async startSession(alias: string, exampleId: string): Promise<string> {
    const body = (await this.post("/sessions", {
      participant_alias: alias,
      example_id: exampleId,
    })) as Record<string, unknown>;
    need(body.session_id, "session_id", "string");
    return body.session_id as string;
  }

  async submitCode(sessionId: string, code: string): Promise<SubmissionRecord> {
    const body = (await this.post(`/sessions/${sessionId}/submissions`, {
      code,
    })) as Record<string, unknown>;
    need(body.index, "index", "number");
    need(body.passed, "passed", "boolean");
    need(body.status, "status", "string");
    needNullable(body.failed_set, "failed_set", "number");
    needNullable(body.failed_assert, "failed_assert", "number");
    needNullable(body.error, "error", "string");
    return body as unknown as SubmissionRecord;
  }

  async recordOutcome(sessionId: string, outcome: Outcome): Promise<boolean> {
    const body = (await this.post(
      `/sessions/${sessionId}/outcome`,
      outcome,
    )) as Record<string, unknown>;
    need(body.solved, "solved", "boolean");
    return body.solved as boolean;
  }

  async summary(): Promise<Summary> {
    const body = (await this.request("/summary")) as Record<string, unknown>;
    need(body.sessions, "sessions", "number");
    need(body.solve_rate, "solve_rate", "number");
    return body as unknown as Summary;
  }
}
