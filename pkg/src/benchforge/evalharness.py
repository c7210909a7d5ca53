"""Evaluating code generators on benchmark examples.

Builds completion prompts from stored examples (instruction shown as the
docstring, target body blanked out), turns model completions back into
runnable candidate programs, grades them against every test set of the
example, reports pass@k with optional factor breakdowns, and optionally
runs a feedback-driven refinement loop over the failing samples.

Prompts never contain test code; `ensure_hygiene` masks any 20-character
overlap with the held-out tests before a prompt leaves this module.
"""

from __future__ import annotations

import ast
import re
import textwrap
from dataclasses import dataclass
from typing import Protocol, Sequence

from . import slots
from .analysis import (
    BREAKDOWN_FACTORS,
    PassReport,
    breakdown,
    build_pass_report,
    compute_metrics,
    count_code_tokens,
    import_class_value,
)
from .errors import HygieneError, InfraError, SlotError
from .executor import (
    ExecutionEnvironment,
    Executor,
    run_test_sets,
)
from .gateway import ChatRequest, LlmGateway, extract_code_block, message
from .pipeline.model import EvalExample, Instruction
from .pipeline.prompts import eval_prompt, refine_prompt

DEFAULT_K_LIST = (1, 2, 5, 10)
SHINGLE_WIDTH = 20
HYGIENE_ROUNDS = 5
STDERR_FEEDBACK_LINES = 20
STATUS_REFUSAL = "refusal"

_WORKDIR_RE = re.compile(r"/[^\s'\"]*benchforge-run-[^\s'\"/]*")


# ---------------------------------------------------------------------------
# Generators


class Generator(Protocol):
    """Anything that turns a prompt into candidate completions."""

    def generate(
        self, prompt: str, n: int, temperature: float, top_p: float
    ) -> list[str]: ...


@dataclass
class GatewayGenerator:
    """Samples completions from a chat model behind an LlmGateway."""

    gateway: LlmGateway
    model: str
    max_tokens: int | None = None

    def generate(
        self, prompt: str, n: int, temperature: float, top_p: float
    ) -> list[str]:
        request = ChatRequest(
            model=self.model,
            messages=[message("user", prompt)],
            temperature=temperature,
            top_p=top_p,
            n=n,
            max_tokens=self.max_tokens,
        )
        return list(self.gateway.complete(request).samples)


class OracleGenerator:
    """Answers each example's own prompt with its stored reference solution.

    Useful as a harness sanity check: every sample must pass, so pass@k is
    exactly 1.0 for every k.
    """

    def __init__(self, examples: Sequence[EvalExample]):
        self._by_prompt = {}
        for example in examples:
            solution = slots.strip_markers(slots.assemble(example.frame, example.target))
            self._by_prompt[build_prompt(example)] = f"```python\n{solution}```"

    def generate(
        self, prompt: str, n: int, temperature: float, top_p: float
    ) -> list[str]:
        completion = self._by_prompt.get(prompt)
        if completion is None:
            raise ValueError("prompt does not match any known example")
        return [completion] * n


# ---------------------------------------------------------------------------
# Prompt hygiene: no 20-character run of any held-out test may appear in a
# prompt.


def _shingles(texts: Sequence[str], width: int) -> set[str]:
    out: set[str] = set()
    for text in texts:
        for i in range(len(text) - width + 1):
            out.add(text[i : i + width])
    return out


def check_hygiene(
    text: str, protected: Sequence[str], width: int = SHINGLE_WIDTH
) -> list[tuple[int, int]]:
    """Character spans of `text` that overlap any protected text by at least
    `width` consecutive characters. Overlapping hits are merged."""
    shingles = _shingles(protected, width)
    if not shingles:
        return []
    spans: list[list[int]] = []
    for i in range(len(text) - width + 1):
        if text[i : i + width] in shingles:
            if spans and i <= spans[-1][1]:
                spans[-1][1] = i + width
            else:
                spans.append([i, i + width])
    return [(s, e) for s, e in spans]


def mask_spans(text: str, spans: Sequence[tuple[int, int]], fill: str = "#") -> str:
    chars = list(text)
    for start, end in spans:
        for i in range(start, end):
            chars[i] = fill
    return "".join(chars)


def ensure_hygiene(
    text: str,
    protected: Sequence[str],
    width: int = SHINGLE_WIDTH,
    max_rounds: int = HYGIENE_ROUNDS,
) -> str:
    """Mask test overlaps out of `text`, re-checking after each pass."""
    for _ in range(max_rounds):
        spans = check_hygiene(text, protected, width)
        if not spans:
            return text
        text = mask_spans(text, spans)
    if check_hygiene(text, protected, width):
        raise HygieneError(
            f"prompt still overlaps held-out tests after {max_rounds} masking rounds"
        )
    return text


# ---------------------------------------------------------------------------
# Prompt construction


def target_indent(frame: str) -> str:
    for line in frame.splitlines():
        if line.strip() == slots.BEGIN_TARGET_MARKER:
            return line[: len(line) - len(line.lstrip())]
    raise SlotError("frame has no begin marker")


def _instruction_block(instruction: Instruction, indent: str) -> list[str]:
    lines = [ln.replace('"""', "'''") for ln in instruction.render().splitlines()]
    block = [f'{indent}"""{lines[0]}']
    block.extend(f"{indent}{ln}" for ln in lines[1:])
    block.append(f'{indent}"""')
    return block


def build_prompt_code(example: EvalExample) -> str:
    """The code shown to the generator: the full program with the target
    function's docstring replaced by the instruction and its body replaced
    by a `...` placeholder."""
    full = slots.assemble(example.frame, example.target)
    lines = full.splitlines()
    begin = next(
        i for i, ln in enumerate(lines) if ln.strip() == slots.BEGIN_TARGET_MARKER
    )
    end = next(
        i for i, ln in enumerate(lines) if ln.strip() == slots.END_TARGET_MARKER
    )
    indent = lines[begin][: len(lines[begin]) - len(lines[begin].lstrip())]
    block = _instruction_block(example.instruction, indent)

    try:
        tree = ast.parse(full)
    except SyntaxError as exc:
        raise SlotError(f"assembled example does not parse: {exc.msg}") from exc
    node = slots.find_function(tree, example.function_name)
    body = node.body
    has_docstring = (
        isinstance(body[0], ast.Expr)
        and isinstance(body[0].value, ast.Constant)
        and isinstance(body[0].value.value, str)
        and body[0].end_lineno - 1 < begin
    )
    if has_docstring:
        doc_start, doc_end = body[0].lineno - 1, body[0].end_lineno - 1
        out = (
            lines[:doc_start]
            + block
            + lines[doc_end + 1 : begin]
            + [indent + "..."]
            + lines[end + 1 :]
        )
    else:
        out = lines[:begin] + block + [indent + "..."] + lines[end + 1 :]
    return "\n".join(out) + "\n"


def build_prompt(example: EvalExample) -> str:
    prompt = eval_prompt(example.function_name, build_prompt_code(example))
    return ensure_hygiene(prompt, [ts.code for ts in example.test_sets])


# ---------------------------------------------------------------------------
# Turning completions back into runnable candidate programs


def is_refusal(completion: str) -> bool:
    """A reply with neither a fenced block nor a def is not an attempt."""
    return "```" not in completion and "def " not in completion


def _reindent(target: str, old_indent: str, new_indent: str) -> str:
    out = []
    for line in target.splitlines():
        if not line.strip():
            out.append("")
        elif line.startswith(old_indent):
            out.append(new_indent + line[len(old_indent) :])
        else:
            out.append(new_indent + line.lstrip())
    return "\n".join(out) + "\n"


def _splice_raw(code: str, indent: str) -> str:
    body = textwrap.dedent(code)
    lines = [indent + ln if ln.strip() else "" for ln in body.splitlines()]
    if not any(ln.strip() for ln in lines):
        return indent + "pass\n"
    return "\n".join(lines) + "\n"


def candidate_target(completion: str, function_name: str, indent: str) -> str:
    """Extract a replacement body for the target function from a completion.

    A parseable completion that redefines the function contributes that
    function's body (re-indented to the example's slot); anything else is
    spliced in verbatim and left for execution to judge.
    """
    code = extract_code_block(completion)
    if not code.strip():
        return indent + "pass\n"
    try:
        tree = ast.parse(code)
    except SyntaxError:
        return _splice_raw(code, indent)
    try:
        slots.find_function(tree, function_name)
    except SlotError:
        return _splice_raw(code, indent)
    try:
        split = slots.split_target(code, function_name)
    except SlotError:
        # One-line defs split fine once normalized onto multiple lines.
        try:
            split = slots.split_target(ast.unparse(tree) + "\n", function_name)
        except SlotError:
            return _splice_raw(code, indent)
    return _reindent(split.target, split.indent, indent)


def candidate_program(example: EvalExample, completion: str) -> str:
    indent = target_indent(example.frame)
    target = candidate_target(completion, example.function_name, indent)
    return slots.assemble(example.frame, target)


# ---------------------------------------------------------------------------
# Grading


@dataclass
class SampleOutcome:
    completion: str
    status: str
    passed: bool
    refusal: bool
    program: str | None = None
    failed_set: int | None = None
    failed_assert: int | None = None
    error: str | None = None
    stderr_tail: str = ""

    def to_record(self) -> dict:
        return {
            "status": self.status,
            "passed": self.passed,
            "refusal": self.refusal,
            "failed_set": self.failed_set,
            "failed_assert": self.failed_assert,
        }


def grade_completion(
    executor: Executor,
    example: EvalExample,
    completion: str,
    timeout: float = 10.0,
    env: ExecutionEnvironment | None = None,
) -> SampleOutcome:
    """Run one completion against every test set of the example.

    An infrastructure failure is retried once; a second one aborts the
    evaluation rather than being scored as a model failure.
    """
    if is_refusal(completion):
        return SampleOutcome(completion, STATUS_REFUSAL, passed=False, refusal=True)
    program = candidate_program(example, completion)
    tests = [ts.code for ts in example.test_sets]
    outcome = run_test_sets(executor, program, tests, timeout=timeout, env=env)
    if outcome.infra:
        outcome = run_test_sets(executor, program, tests, timeout=timeout, env=env)
        if outcome.infra:
            failing = outcome.first_failure()
            detail = outcome.reports[failing].error if failing is not None else None
            raise InfraError(
                f"persistent infrastructure failure grading {example.id}: {detail}"
            )
    if outcome.passed:
        return SampleOutcome(completion, "passed", passed=True, refusal=False, program=program)
    index = outcome.first_failure()
    report = outcome.reports[index]
    return SampleOutcome(
        completion,
        report.status,
        passed=False,
        refusal=False,
        program=program,
        failed_set=index,
        failed_assert=report.first_failed_assert(),
        error=report.error,
        stderr_tail=report.stderr_tail,
    )


# ---------------------------------------------------------------------------
# Factor values for breakdowns


def example_factors(example: EvalExample) -> dict[str, float]:
    full = slots.assemble(example.frame, example.target)
    span = slots.target_span(full)
    return {
        "target_length": count_code_tokens(example.target),
        "context_length": count_code_tokens(example.frame),
        "function_calls": compute_metrics(full, target_span=span).function_calls_in_target,
        "import_class": import_class_value(compute_metrics(full)),
    }


# ---------------------------------------------------------------------------
# Evaluation


@dataclass
class EvaluationResult:
    report: PassReport
    samples: dict[str, list[SampleOutcome]]
    refusals: int

    def to_record(self) -> dict:
        record = self.report.to_record()
        record["refusals"] = self.refusals
        record["samples"] = {
            example_id: [s.to_record() for s in outcomes]
            for example_id, outcomes in self.samples.items()
        }
        return record


def example_environment(env_manager, example: EvalExample) -> ExecutionEnvironment | None:
    """The execution environment for an example's pinned dependencies, or
    None when it needs nothing beyond the interpreter."""
    if env_manager is None or not example.dependencies:
        return None
    return env_manager.get(example.dependencies)


def evaluate(
    examples: Sequence[EvalExample],
    generator: Generator,
    executor: Executor,
    *,
    n_samples: int = 20,
    k_list: Sequence[int] = DEFAULT_K_LIST,
    temperature: float = 0.3,
    top_p: float = 0.95,
    timeout: float = 10.0,
    env_manager=None,
    with_breakdowns: bool = True,
) -> EvaluationResult:
    """Sample `n_samples` completions per example and estimate pass@k.

    A sample passes only if every test set of its example passes. Factor
    breakdowns are attached when there are enough examples to form bins.
    """
    if not examples:
        raise ValueError("no examples to evaluate")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    bad_k = [k for k in k_list if not 1 <= k <= n_samples]
    if bad_k:
        raise ValueError(f"k values {bad_k} outside 1..{n_samples}")

    per_example: list[tuple[str, int, int]] = []
    samples: dict[str, list[SampleOutcome]] = {}
    refusals = 0
    for example in examples:
        env = example_environment(env_manager, example)
        prompt = build_prompt(example)
        completions = generator.generate(
            prompt, n=n_samples, temperature=temperature, top_p=top_p
        )
        if len(completions) != n_samples:
            raise ValueError(
                f"generator returned {len(completions)} samples, expected {n_samples}"
            )
        outcomes = [
            grade_completion(executor, example, completion, timeout=timeout, env=env)
            for completion in completions
        ]
        refusals += sum(1 for o in outcomes if o.refusal)
        per_example.append((example.id, n_samples, sum(o.passed for o in outcomes)))
        samples[example.id] = outcomes

    report = build_pass_report(per_example, list(k_list))
    if with_breakdowns and len(examples) >= 5:
        pass1 = {eid: c / n for eid, n, c in per_example}
        factors = {example.id: example_factors(example) for example in examples}
        report.breakdowns = {
            factor: breakdown(
                {eid: values[factor] for eid, values in factors.items()}, pass1, factor
            )
            for factor in BREAKDOWN_FACTORS
        }
    return EvaluationResult(report=report, samples=samples, refusals=refusals)


# ---------------------------------------------------------------------------
# Feedback-driven refinement


def render_feedback(outcome: SampleOutcome, protected: Sequence[str]) -> str:
    """Execution feedback for a failing sample, built from the verdict plus
    the tail of stderr, with temp paths and test overlaps masked out."""
    if outcome.refusal:
        return "status: refusal\ndetail: the previous reply contained no code"
    lines = [f"status: {outcome.status}"]
    if outcome.failed_set is not None:
        lines.append(f"failing test set: {outcome.failed_set + 1}")
    if outcome.failed_assert is not None:
        lines.append(f"failing assert: {outcome.failed_assert}")
    if outcome.error:
        lines.append(f"detail: {outcome.error}")
    if outcome.stderr_tail:
        tail = outcome.stderr_tail.splitlines()[-STDERR_FEEDBACK_LINES:]
        lines.append(f"stderr (last {STDERR_FEEDBACK_LINES} lines):")
        lines.append(_WORKDIR_RE.sub("<workdir>", "\n".join(tail)))
    return ensure_hygiene("\n".join(lines), protected)


@dataclass
class _Thread:
    example: EvalExample
    env: ExecutionEnvironment | None
    task_prompt: str
    completion: str
    outcome: SampleOutcome
    passed_round: int | None


@dataclass
class RefinementResult:
    accuracy_by_round: list[float]
    first_passed_round: dict[str, list[int | None]]
    rounds: int
    n_samples: int

    def to_record(self) -> dict:
        return {
            "accuracy_by_round": list(self.accuracy_by_round),
            "first_passed_round": {k: list(v) for k, v in self.first_passed_round.items()},
            "rounds": self.rounds,
            "n_samples": self.n_samples,
        }


def refine_loop(
    examples: Sequence[EvalExample],
    generator: Generator,
    executor: Executor,
    *,
    rounds: int = 4,
    n_samples: int = 10,
    temperature: float = 0.3,
    top_p: float = 0.95,
    timeout: float = 10.0,
    env_manager=None,
) -> RefinementResult:
    """Give each failing sample `rounds` feedback-and-retry attempts.

    A sample that passes stays passed, so accuracy by round is cumulative
    and round 0 equals the plain empirical pass rate of the first samples.
    """
    if not examples:
        raise ValueError("no examples to refine")
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")

    threads: list[_Thread] = []
    for example in examples:
        env = example_environment(env_manager, example)
        prompt = build_prompt(example)
        completions = generator.generate(
            prompt, n=n_samples, temperature=temperature, top_p=top_p
        )
        if len(completions) != n_samples:
            raise ValueError(
                f"generator returned {len(completions)} samples, expected {n_samples}"
            )
        for completion in completions:
            outcome = grade_completion(
                executor, example, completion, timeout=timeout, env=env
            )
            threads.append(
                _Thread(
                    example=example,
                    env=env,
                    task_prompt=prompt,
                    completion=completion,
                    outcome=outcome,
                    passed_round=0 if outcome.passed else None,
                )
            )

    total = len(threads)
    accuracy = [sum(t.passed_round is not None for t in threads) / total]
    for round_index in range(1, rounds + 1):
        for thread in threads:
            if thread.passed_round is not None:
                continue
            protected = [ts.code for ts in thread.example.test_sets]
            feedback = render_feedback(thread.outcome, protected)
            shown = extract_code_block(thread.completion)
            prompt = ensure_hygiene(
                refine_prompt(task=thread.task_prompt, code=shown, feedback=feedback),
                protected,
            )
            thread.completion = generator.generate(
                prompt, n=1, temperature=temperature, top_p=top_p
            )[0]
            thread.outcome = grade_completion(
                executor, thread.example, thread.completion, timeout=timeout, env=thread.env
            )
            if thread.outcome.passed:
                thread.passed_round = round_index
        accuracy.append(sum(t.passed_round is not None for t in threads) / total)

    first_passed: dict[str, list[int | None]] = {}
    for thread in threads:
        first_passed.setdefault(thread.example.id, []).append(thread.passed_round)
    return RefinementResult(
        accuracy_by_round=accuracy,
        first_passed_round=first_passed,
        rounds=rounds,
        n_samples=n_samples,
    )
