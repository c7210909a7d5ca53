// Browser entry point: pick a problem, open a session, and wire the state
// machine to the page. Problem and alias come from the query string
// (?problem=<id>&alias=<name>); with no problem given, the first listed one
// is used so the page works out of the box against a local server.

import { ApiError, StudyClient } from "./api.js";
import { prefillEditor } from "./prefill.js";
import { SessionState } from "./state.js";
import { StudyView } from "./view.js";

export async function boot(
  root: HTMLElement,
  client: StudyClient,
  params: URLSearchParams,
): Promise<{ state: SessionState; view: StudyView }> {
  const state = new SessionState();

  const handlers = {
    onSubmit(code: string): void {
      state.submitStarted();
      view.update();
      client
        .submitCode(state.sessionId!, code)
        .then((record) => {
          state.submissionGraded(record);
          view.update();
        })
        .catch((err) => {
          // server rejection or malformed reply: show it, count nothing
          const message = err instanceof ApiError ? err.message : String(err);
          state.gradingFailed(message);
          view.update();
        });
    },
    onGiveUp(): void {
      state.giveUp();
      view.update();
    },
    onFinish(): void {
      client
        .recordOutcome(state.sessionId!, state.outcomePayload())
        .then((solved) => {
          state.outcomeRecorded(solved);
          view.update();
        })
        .catch((err) => {
          state.banner = err instanceof ApiError ? err.message : String(err);
          view.update();
        });
    },
  };
  const view = new StudyView(root, state, handlers);
  view.update();

  await client.health();
  let exampleId = params.get("problem");
  if (exampleId === null) {
    const problems = await client.listProblems();
    if (problems.length === 0) {
      throw new ApiError("server has no problems loaded");
    }
    exampleId = problems[0]!.example_id;
  }
  const alias = params.get("alias") ?? "anonymous";
  const problem = await client.getProblem(exampleId);
  const sessionId = await client.startSession(alias, exampleId);
  state.problemLoaded(problem, sessionId);
  view.setEditorText(prefillEditor(problem.code, problem.function_name).text);
  view.update();
  return { state, view };
}

declare global {
  interface Window {
    __study?: Promise<{ state: SessionState; view: StudyView }>;
  }
}

export function main(): void {
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("missing #app container");
  }
  const base = new URLSearchParams(window.location.search).get("server") ?? "";
  const client = new StudyClient(base);
  window.__study = boot(
    root,
    client,
    new URLSearchParams(window.location.search),
  ).catch((err) => {
    root.textContent = `failed to start: ${String(err)}`;
    throw err;
  });
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  main();
}
