"""LLM-driven stage operations: sandbox rewriting, test generation,
execute-and-debug, instruction writing, and test augmentation.

Every operation validates model output before accepting it and retries a
bounded number of times with the identical prompt; a recorded transcript
therefore replays regenerations in order. Validation failures are returned
as StageFailure values with machine-readable reasons so the funnel can
account for every fragment.
"""

from __future__ import annotations

import ast
import logging
import re
from dataclasses import dataclass, field

from .. import analysis, slots
from ..corpus import SourceFragment
from ..errors import CodeParseError, InfraError, SlotError
from ..executor import (
    ExecutionJob,
    Executor,
    ExecutionEnvironment,
    STATUS_INFRA_ERROR,
    STATUS_PASSED,
)
from ..gateway import ChatRequest, LlmGateway, extract_code_block, message
from . import prompts
from .model import Instruction, TestSet

logger = logging.getLogger(__name__)

# Acceptance thresholds for sandbox rewrites.
MIN_TARGET_BLEU = 0.25
MIN_CONTEXT_TOKENS = 30

# A tests block must assert at least this many times.
MIN_ASSERTS = 3

# A debug rewrite shrinking below this fraction of the original script is
# assumed to have deleted functionality (or the tests) and is rejected.
SHRINK_GUARD_RATIO = 0.6


@dataclass
class StageSettings:
    model: str
    temperature: float = 0.3
    top_p: float = 0.95
    max_attempts: int = 3

    def request(self, prompt: str, n: int = 1) -> ChatRequest:
        return ChatRequest(
            model=self.model,
            messages=[message("user", prompt)],
            temperature=self.temperature,
            top_p=self.top_p,
            n=n,
        )


@dataclass
class AugmentSettings:
    model: str
    temperature: float = 0.3
    top_p: float = 0.7
    k: int = 5

    def request(self, prompt: str) -> ChatRequest:
        return ChatRequest(
            model=self.model,
            messages=[message("user", prompt)],
            temperature=self.temperature,
            top_p=self.top_p,
            n=self.k,
        )


@dataclass
class StageFailure:
    reason: str
    detail: str = ""


def _normalize(code: str) -> str:
    code = code.rstrip("\n")
    return code + "\n" if code else ""


# ---------------------------------------------------------------------------
# Stage: sandbox rewriting


def validate_sandbox(fragment: SourceFragment, code: str) -> list[str]:
    """Reasons the rewritten program is unusable; empty list means accepted."""
    try:
        ast.parse(code)
    except SyntaxError:
        return ["parse_error"]
    try:
        split = slots.split_target(code, fragment.function_name)
    except SlotError:
        return ["target_missing"]
    reasons = []
    try:
        similarity = analysis.code_bleu(split.target, fragment.body)
    except CodeParseError:
        similarity = 0.0
    if similarity < MIN_TARGET_BLEU:
        reasons.append("target_dissimilar")
    if analysis.count_code_tokens(split.frame) < MIN_CONTEXT_TOKENS:
        reasons.append("context_too_short")
    return reasons


def sandbox_fragment(
    gateway: LlmGateway, settings: StageSettings, fragment: SourceFragment
) -> str | StageFailure:
    prompt = prompts.sandbox_prompt(fragment)
    last_reasons = ["no_output"]
    for _ in range(settings.max_attempts):
        response = gateway.complete(settings.request(prompt))
        code = _normalize(extract_code_block(response.samples[0]))
        reasons = validate_sandbox(fragment, code)
        if not reasons:
            return code
        last_reasons = reasons
    return StageFailure(reason=last_reasons[0])


# ---------------------------------------------------------------------------
# Stage: test generation


def static_check_tests(tests_code: str, function_name: str) -> list[str]:
    try:
        tree = ast.parse(tests_code)
    except SyntaxError:
        return ["parse_error"]
    reasons = []
    assert_count = sum(1 for node in ast.walk(tree) if isinstance(node, ast.Assert))
    if assert_count < MIN_ASSERTS:
        reasons.append("too_few_asserts")
    if not slots.calls_function(tree, function_name):
        reasons.append("target_not_called")
    return reasons


def generate_tests(
    gateway: LlmGateway, settings: StageSettings, function_name: str, program: str
) -> str | StageFailure:
    prompt = prompts.tests_prompt(function_name, program)
    last_reasons = ["no_output"]
    for _ in range(settings.max_attempts):
        response = gateway.complete(settings.request(prompt))
        tests_code = _normalize(extract_code_block(response.samples[0]))
        reasons = static_check_tests(tests_code, function_name)
        if not reasons:
            return tests_code
        last_reasons = reasons
    return StageFailure(reason=last_reasons[0])


# ---------------------------------------------------------------------------
# Stage: execute and debug


def split_combined(code: str) -> tuple[str, str]:
    """Separate a combined script into (program, tests).

    Top-level test_* function defs, top-level asserts, and bare calls to
    test_* functions count as tests; everything else is program.
    """
    tree = ast.parse(code)
    lines = code.splitlines()
    test_ranges: list[tuple[int, int]] = []
    for node in tree.body:
        is_test = False
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            is_test = node.name.startswith("test_")
        elif isinstance(node, ast.Assert):
            is_test = True
        elif isinstance(node, ast.Expr) and isinstance(node.value, ast.Call):
            func = node.value.func
            is_test = isinstance(func, ast.Name) and func.id.startswith("test_")
        if is_test:
            start = min([node.lineno] + [d.lineno for d in getattr(node, "decorator_list", [])])
            test_ranges.append((start - 1, node.end_lineno))
    in_tests = set()
    for start, end in test_ranges:
        in_tests.update(range(start, end))
    program_lines = [ln for i, ln in enumerate(lines) if i not in in_tests]
    tests_lines = [ln for i, ln in enumerate(lines) if i in in_tests]
    return _normalize("\n".join(program_lines)), _normalize("\n".join(tests_lines))


def _report_detail(report) -> str:
    """Feedback for the debug prompt, built only from the shim verdict so the
    prompt is byte-stable across runs (no scratch paths, no timing)."""
    parts = []
    failed = report.first_failed_assert()
    if failed is not None:
        parts.append(f"assert {failed} failed")
    if report.error:
        parts.append(report.error[:500])
    return "; ".join(parts) or "no detail"


@dataclass
class DebugOutcome:
    program: str
    tests: str
    passed: bool
    iterations_used: int  # 0 means the script passed before any rewrite
    statuses: list[str] = field(default_factory=list)


def _acceptable_rewrite(
    candidate: str, function_name: str, baseline_tokens: int
) -> tuple[str, str] | None:
    try:
        tokens = analysis.count_code_tokens(candidate)
    except CodeParseError:
        return None
    if tokens < SHRINK_GUARD_RATIO * baseline_tokens:
        return None
    try:
        program, tests = split_combined(candidate)
        slots.split_target(program, function_name)
    except (SyntaxError, SlotError):
        return None
    if static_check_tests(tests, function_name):
        return None
    return program, tests


def debug_iterate(
    gateway: LlmGateway,
    settings: StageSettings,
    executor: Executor,
    program: str,
    tests: str,
    function_name: str,
    max_iterations: int = 3,
    timeout: float = 10.0,
    env: ExecutionEnvironment | None = None,
) -> DebugOutcome:
    """Run the script; on failure ask for a full rewrite and try again.

    The rewrite may touch both program and tests (they are re-split from the
    combined reply), but rewrites that shrink the script below the guard
    ratio, lose the target function, or weaken the tests below the static
    checks are discarded; the iteration still counts.
    """
    baseline_tokens = analysis.count_code_tokens(program + "\n" + tests)
    statuses: list[str] = []
    for iteration in range(max_iterations + 1):
        report = executor.run(
            ExecutionJob(solution_code=program, tests_code=tests, timeout=timeout), env=env
        )
        statuses.append(report.status)
        if report.status == STATUS_PASSED:
            return DebugOutcome(program, tests, True, iteration, statuses)
        if report.status == STATUS_INFRA_ERROR:
            raise InfraError(report.error or "executor infrastructure failure")
        if iteration == max_iterations:
            break
        script = program + "\n\n" + tests
        prompt = prompts.debug_prompt(
            function_name, script, report.status, _report_detail(report)
        )
        response = gateway.complete(settings.request(prompt))
        candidate = _normalize(extract_code_block(response.samples[0]))
        accepted = _acceptable_rewrite(candidate, function_name, baseline_tokens)
        if accepted is None:
            logger.info("discarded unacceptable rewrite for %s", function_name)
        else:
            program, tests = accepted
    return DebugOutcome(program, tests, False, max_iterations, statuses)


# ---------------------------------------------------------------------------
# Stage: instruction writing

_LABELS = ("functionality", "inputs", "outputs")
_LABEL_RE = re.compile(r"^(functionality|inputs|outputs)\s*:\s*(.*)$", re.IGNORECASE)


def parse_instruction(text: str) -> Instruction | None:
    """Pull the three labelled fields out of a reply; continuation lines
    attach to the preceding label. None if any field is missing or empty."""
    fields: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        found = _LABEL_RE.match(line.strip())
        if found:
            current = found.group(1).lower()
            fields.setdefault(current, [])
            if found.group(2):
                fields[current].append(found.group(2))
        elif current and line.strip():
            fields[current].append(line.strip())
    values = {label: " ".join(fields.get(label, [])).strip() for label in _LABELS}
    if not all(values.values()):
        return None
    return Instruction(
        functionality=values["functionality"],
        inputs=values["inputs"],
        outputs=values["outputs"],
    )


def generate_instruction(
    gateway: LlmGateway,
    settings: StageSettings,
    function_name: str,
    program: str,
    docstring_fallback: str,
) -> tuple[Instruction, bool]:
    """Returns (instruction, degraded). Degraded means both attempts failed
    to parse and the original docstring was used as the functionality text."""
    prompt = prompts.instruction_prompt(function_name, program)
    for _ in range(2):
        response = gateway.complete(settings.request(prompt))
        instruction = parse_instruction(response.samples[0])
        if instruction is not None:
            return instruction, False
    fallback = " ".join(docstring_fallback.split()) or f"Implement {function_name}."
    return Instruction(functionality=fallback, inputs="", outputs=""), True


# ---------------------------------------------------------------------------
# Stage: test augmentation


def augment_tests(
    gateway: LlmGateway,
    settings: AugmentSettings,
    executor: Executor,
    function_name: str,
    program: str,
    existing_tests: str,
    timeout: float = 10.0,
    env: ExecutionEnvironment | None = None,
) -> TestSet | None:
    """One request for k candidate test sets; the first candidate that is
    statically valid and that the reference program passes is kept. None if
    no candidate qualifies."""
    prompt = prompts.augment_prompt(function_name, program, existing_tests)
    response = gateway.complete(settings.request(prompt))
    for sample in response.samples:
        candidate = _normalize(extract_code_block(sample))
        if static_check_tests(candidate, function_name):
            continue
        report = executor.run(
            ExecutionJob(solution_code=program, tests_code=candidate, timeout=timeout),
            env=env,
        )
        if report.status == STATUS_INFRA_ERROR:
            raise InfraError(report.error or "executor infrastructure failure")
        if report.status == STATUS_PASSED:
            return TestSet(name="augmented", code=candidate, origin=f"augmented:{settings.model}")
    return None
