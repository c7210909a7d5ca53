// DOM rendering, no framework. The skeleton is built once; update() refreshes
// the dynamic regions from the state machine. The editor is a plain textarea
// that survives updates, so re-rendering never eats a participant's draft.

import type { Problem, SubmissionRecord } from "./api.js";
import { RATING_KEYS } from "./api.js";
import { findSlotLine, setRows } from "./prefill.js";
import type { SessionState } from "./state.js";

export interface Handlers {
  onSubmit(code: string): void;
  onGiveUp(): void;
  onFinish(): void;
}

const RATING_LABELS: Record<string, string> = {
  difficulty: "How difficult was this problem?",
  instruction_clarity: "How clear was the instruction?",
  test_agreement: "Did the test feedback match the instruction?",
  code_naturalness: "How natural was the surrounding code?",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderInstruction(doc: Document, problem: Problem): HTMLElement {
  const box = el(doc, "section", "instruction");
  const parts: Array<[string, string]> = [
    ["Functionality", problem.instruction.functionality],
    ["Inputs", problem.instruction.inputs],
    ["Outputs", problem.instruction.outputs],
  ];
  for (const [label, text] of parts) {
    const row = el(doc, "div", "instruction-part");
    row.appendChild(el(doc, "h3", "instruction-label", label));
    row.appendChild(el(doc, "p", "instruction-text", text));
    box.appendChild(row);
  }
  return box;
}

export function renderContext(doc: Document, code: string): HTMLElement {
  const pre = el(doc, "pre", "context");
  const slot = findSlotLine(code);
  code.split("\n").forEach((line, i) => {
    const span = el(
      doc,
      "span",
      i === slot ? "context-line slot-line" : "context-line",
      line,
    );
    pre.appendChild(span);
    pre.appendChild(doc.createTextNode("\n"));
  });
  return pre;
}

export function renderSetRows(
  doc: Document,
  testSetCount: number,
  record: SubmissionRecord,
): HTMLElement {
  const list = el(doc, "ul", "set-rows");
  setRows(testSetCount, record).forEach((row, i) => {
    const item = el(doc, "li", `set-row set-${row.kind}`);
    item.appendChild(el(doc, "span", "set-name", `test set ${i + 1}`));
    if (row.kind === "passed") {
      item.appendChild(el(doc, "span", "set-status", "passed"));
    } else if (row.kind === "not_run") {
      item.appendChild(el(doc, "span", "set-status", "not run"));
    } else {
      item.appendChild(el(doc, "span", "set-status", row.status));
      if (row.failedAssert !== null) {
        item.appendChild(
          el(doc, "span", "set-detail", `assert ${row.failedAssert} failed`),
        );
      }
      if (row.error) {
        item.appendChild(el(doc, "span", "set-error", row.error));
      }
    }
    list.appendChild(item);
  });
  return list;
}

export class StudyView {
  private readonly doc: Document;
  private readonly editor: HTMLTextAreaElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly giveUpButton: HTMLButtonElement;
  private readonly finishButton: HTMLButtonElement;
  private readonly banner: HTMLElement;
  private readonly results: HTMLElement;
  private readonly problemPane: HTMLElement;
  private readonly ratingPane: HTMLElement;
  private readonly ratingInputs = new Map<string, HTMLInputElement[]>();
  private readonly externalBox: HTMLInputElement;
  private staticRendered = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly state: SessionState,
    private readonly handlers: Handlers,
  ) {
    this.doc = root.ownerDocument;
    const doc = this.doc;

    this.problemPane = el(doc, "div", "problem-pane");
    this.banner = el(doc, "div", "banner");
    this.results = el(doc, "div", "results");
    this.editor = el(doc, "textarea", "editor");
    this.editor.rows = 18;
    this.submitButton = el(doc, "button", "submit", "Submit");
    this.submitButton.addEventListener("click", () => {
      if (this.state.phase === "editing") {
        this.handlers.onSubmit(this.editor.value);
      }
    });
    this.giveUpButton = el(doc, "button", "give-up", "Give up");
    this.giveUpButton.addEventListener("click", () => {
      if (this.state.phase === "editing") {
        this.handlers.onGiveUp();
      }
    });

    this.ratingPane = el(doc, "div", "rating-pane");
    for (const key of RATING_KEYS) {
      const row = el(doc, "div", "rating-row");
      row.appendChild(el(doc, "span", "rating-label", RATING_LABELS[key] ?? key));
      const inputs: HTMLInputElement[] = [];
      for (let value = 1; value <= 5; value += 1) {
        const label = el(doc, "label", "rating-choice", String(value));
        const input = el(doc, "input") as HTMLInputElement;
        input.type = "radio";
        input.name = `rating-${key}`;
        input.value = String(value);
        input.addEventListener("change", () => {
          this.state.setRating(key, value);
          this.update();
        });
        label.prepend(input);
        inputs.push(input);
        row.appendChild(label);
      }
      this.ratingInputs.set(key, inputs);
      this.ratingPane.appendChild(row);
    }
    const externalRow = el(doc, "label", "external-row", "I used external resources");
    this.externalBox = el(doc, "input") as HTMLInputElement;
    this.externalBox.type = "checkbox";
    this.externalBox.addEventListener("change", () => {
      this.state.usedExternalResources = this.externalBox.checked;
    });
    externalRow.prepend(this.externalBox);
    this.ratingPane.appendChild(externalRow);
    this.finishButton = el(doc, "button", "finish", "Finish");
    this.finishButton.addEventListener("click", () => {
      if (this.state.phase === "rating" && this.state.ratingsComplete) {
        this.handlers.onFinish();
      }
    });
    this.ratingPane.appendChild(this.finishButton);
  }

  editorText(): string {
    return this.editor.value;
  }

  setEditorText(text: string): void {
    this.editor.value = text;
  }

  private renderStatic(problem: Problem): void {
    const doc = this.doc;
    this.problemPane.appendChild(
      el(doc, "h2", "problem-title", problem.function_name),
    );
    this.problemPane.appendChild(renderInstruction(doc, problem));
    this.problemPane.appendChild(renderContext(doc, problem.code));
    this.root.appendChild(this.problemPane);
    this.root.appendChild(this.banner);
    this.root.appendChild(this.results);
    this.root.appendChild(this.editor);
    this.root.appendChild(this.submitButton);
    this.root.appendChild(this.giveUpButton);
    this.root.appendChild(this.ratingPane);
    this.staticRendered = true;
  }

  update(): void {
    const state = this.state;
    if (state.phase === "loading" || state.problem === null) {
      this.root.textContent = "loading problem...";
      return;
    }
    if (!this.staticRendered) {
      this.root.textContent = "";
      this.renderStatic(state.problem);
    }

    const editing = state.phase === "editing";
    this.editor.disabled = !editing;
    this.submitButton.disabled = !editing;
    this.giveUpButton.disabled = !editing;
    this.submitButton.textContent =
      state.phase === "grading" ? "Grading..." : "Submit";

    this.results.textContent = "";
    const last = state.lastSubmission;
    if (last !== null) {
      const verdict = last.passed
        ? "All test sets passed."
        : `Attempt ${last.index + 1}: ${last.status}`;
      this.results.appendChild(
        el(this.doc, "div", last.passed ? "verdict passed" : "verdict failed", verdict),
      );
      this.results.appendChild(
        renderSetRows(this.doc, state.problem.test_set_count, last),
      );
    }

    this.banner.textContent = state.banner ?? "";
    this.banner.hidden = state.banner === null;

    const rating = state.phase === "rating";
    this.ratingPane.hidden = !rating && state.phase !== "done";
    const locked = state.phase === "done";
    for (const inputs of this.ratingInputs.values()) {
      for (const input of inputs) {
        input.disabled = locked;
      }
    }
    this.externalBox.disabled = locked;
    this.finishButton.disabled = locked || !state.ratingsComplete;
    if (state.phase === "done") {
      this.finishButton.textContent = state.solved ? "Solved" : "Recorded";
    }
  }
}
