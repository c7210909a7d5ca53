"""End-to-end pipeline: fragments in, executable benchmark examples out,
with a funnel report accounting for every fragment at every stage."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .. import analysis, slots
from ..corpus import SourceFragment, prefilter
from ..errors import SlotError
from ..executor import EnvironmentManager, Executor
from ..gateway import LlmGateway
from . import postprocess, stages
from .model import EvalExample, Instruction, TestSet

logger = logging.getLogger(__name__)


@dataclass
class PipelineSettings:
    model: str
    augment_model: str | None = None
    temperature: float = 0.3
    top_p: float = 0.95
    max_attempts: int = 3
    debug_iterations: int = 3
    augment_k: int = 5
    augment_temperature: float = 0.3
    augment_top_p: float = 0.7
    timeout: float = 10.0
    # optional per-stage model overrides, keyed sandbox/tests/debug/instruction
    stage_models: dict[str, str] = field(default_factory=dict)
    io_keywords: tuple[str, ...] | None = None
    banned_keywords: tuple[str, ...] | None = None

    def stage_settings(self, stage: str = "") -> stages.StageSettings:
        return stages.StageSettings(
            model=self.stage_models.get(stage, self.model),
            temperature=self.temperature,
            top_p=self.top_p,
            max_attempts=self.max_attempts,
        )

    def augment_settings(self) -> stages.AugmentSettings | None:
        if not self.augment_model:
            return None
        return stages.AugmentSettings(
            model=self.augment_model,
            temperature=self.augment_temperature,
            top_p=self.augment_top_p,
            k=self.augment_k,
        )


@dataclass
class StageCount:
    entered: int = 0
    accepted: int = 0
    dropped: dict[str, int] = field(default_factory=dict)

    def drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())

    def to_record(self) -> dict:
        return {
            "entered": self.entered,
            "accepted": self.accepted,
            "dropped": dict(sorted(self.dropped.items())),
        }


@dataclass
class FunnelReport:
    input_fragments: int = 0
    prefilter: StageCount = field(default_factory=StageCount)
    sandbox: StageCount = field(default_factory=StageCount)
    test_generation: StageCount = field(default_factory=StageCount)
    debug_entered: int = 0
    debug_cumulative_passed: list[int] = field(default_factory=list)
    post_processing: StageCount = field(default_factory=StageCount)
    emitted: int = 0

    def to_record(self) -> dict:
        return {
            "input_fragments": self.input_fragments,
            "prefilter": self.prefilter.to_record(),
            "sandbox": self.sandbox.to_record(),
            "test_generation": self.test_generation.to_record(),
            "execute_debug": {
                "entered": self.debug_entered,
                "cumulative_passed": list(self.debug_cumulative_passed),
                "failed": self.debug_entered
                - (self.debug_cumulative_passed[-1] if self.debug_cumulative_passed else 0),
            },
            "post_processing": self.post_processing.to_record(),
            "emitted": self.emitted,
        }

    def check_conservation(self) -> None:
        """Every fragment entering a stage is either accepted or dropped,
        and stages chain without gaps."""
        for name in ("prefilter", "sandbox", "test_generation", "post_processing"):
            stage: StageCount = getattr(self, name)
            if stage.entered != stage.accepted + stage.dropped_total:
                raise AssertionError(
                    f"{name}: entered {stage.entered} != accepted {stage.accepted}"
                    f" + dropped {stage.dropped_total}"
                )
        if self.prefilter.entered != self.input_fragments:
            raise AssertionError("prefilter must see every input fragment")
        if self.sandbox.entered != self.prefilter.accepted:
            raise AssertionError("sandbox entered != prefilter accepted")
        if self.test_generation.entered != self.sandbox.accepted:
            raise AssertionError("test_generation entered != sandbox accepted")
        if self.debug_entered != self.test_generation.accepted:
            raise AssertionError("debug entered != test_generation accepted")
        if self.debug_cumulative_passed:
            if any(
                b < a
                for a, b in zip(self.debug_cumulative_passed, self.debug_cumulative_passed[1:])
            ):
                raise AssertionError("cumulative debug passes must be nondecreasing")
            if self.post_processing.entered != self.debug_cumulative_passed[-1]:
                raise AssertionError("post_processing entered != debug passed")
        if self.emitted != self.post_processing.accepted:
            raise AssertionError("emitted != post_processing accepted")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_record(), sort_keys=True, indent=2) + "\n", "utf-8"
        )


@dataclass
class PipelineResult:
    examples: list[EvalExample]
    funnel: FunnelReport
    dropped: list[tuple[str, str]] = field(default_factory=list)


def _external_dependencies(program: str) -> list[str]:
    metrics = analysis.compute_metrics(program)
    return sorted(metrics.external_imports)


def run_pipeline(
    fragments: Sequence[SourceFragment],
    gateway: LlmGateway,
    executor: Executor,
    env_manager: EnvironmentManager,
    settings: PipelineSettings,
) -> PipelineResult:
    """Process fragments in input order through every stage.

    All model calls go through `gateway`, so a recorded transcript replays
    the whole run deterministically; nothing time- or path-dependent is
    written into the examples or the funnel.
    """
    sandbox_settings = settings.stage_settings("sandbox")
    tests_settings = settings.stage_settings("tests")
    debug_settings = settings.stage_settings("debug")
    instruction_settings = settings.stage_settings("instruction")
    augment_settings = settings.augment_settings()
    io_keywords = settings.io_keywords
    funnel = FunnelReport(input_fragments=len(fragments))
    dropped: list[tuple[str, str]] = []
    max_iter = settings.debug_iterations
    passed_by_iteration = [0] * (max_iter + 1)

    candidates: list[EvalExample] = []
    for fragment in fragments:
        funnel.prefilter.entered += 1
        decision = (
            prefilter(fragment)
            if io_keywords is None
            else prefilter(fragment, io_keywords=io_keywords)
        )
        if not decision.keep:
            funnel.prefilter.drop(decision.reason)
            dropped.append((fragment.id, f"prefilter:{decision.reason}"))
            continue
        funnel.prefilter.accepted += 1

        funnel.sandbox.entered += 1
        sandboxed = stages.sandbox_fragment(gateway, sandbox_settings, fragment)
        if isinstance(sandboxed, stages.StageFailure):
            funnel.sandbox.drop(sandboxed.reason)
            dropped.append((fragment.id, f"sandbox:{sandboxed.reason}"))
            continue
        funnel.sandbox.accepted += 1

        funnel.test_generation.entered += 1
        tests_code = stages.generate_tests(
            gateway, tests_settings, fragment.function_name, sandboxed
        )
        if isinstance(tests_code, stages.StageFailure):
            funnel.test_generation.drop(tests_code.reason)
            dropped.append((fragment.id, f"tests:{tests_code.reason}"))
            continue
        funnel.test_generation.accepted += 1

        funnel.debug_entered += 1
        outcome = stages.debug_iterate(
            gateway,
            debug_settings,
            executor,
            sandboxed,
            tests_code,
            fragment.function_name,
            max_iterations=max_iter,
            timeout=settings.timeout,
        )
        if not outcome.passed:
            dropped.append((fragment.id, "debug:never_passed"))
            continue
        try:
            split = slots.split_target(outcome.program, fragment.function_name)
        except SlotError:
            # guarded against in the debug stage; belt and braces
            dropped.append((fragment.id, "debug:target_lost"))
            continue
        passed_by_iteration[outcome.iterations_used] += 1

        instruction, degraded = stages.generate_instruction(
            gateway,
            instruction_settings,
            fragment.function_name,
            outcome.program,
            fragment.docstring,
        )

        test_sets = [TestSet(name="generated", code=outcome.tests, origin="generated")]
        if augment_settings is not None:
            augmented = stages.augment_tests(
                gateway,
                augment_settings,
                executor,
                fragment.function_name,
                outcome.program,
                outcome.tests,
                timeout=settings.timeout,
            )
            if augmented is not None:
                test_sets.append(augmented)

        candidates.append(
            EvalExample(
                id=fragment.id,
                frame=split.frame,
                target=split.target,
                header=split.header,
                function_name=fragment.function_name,
                instruction=instruction,
                test_sets=test_sets,
                dependencies=_external_dependencies(outcome.program),
                provenance={
                    "repo": fragment.repo,
                    "path": fragment.path,
                    "license": fragment.license,
                },
                metadata={
                    "debug_iterations": outcome.iterations_used,
                    "instruction_degraded": degraded,
                    "augmented": len(test_sets) > 1,
                },
            )
        )

    # cumulative counts: examples whose script passed by iteration <= i
    funnel.debug_cumulative_passed = [
        sum(passed_by_iteration[: i + 1]) for i in range(max_iter + 1)
    ]

    funnel.post_processing.entered = len(candidates)
    filtered = postprocess.final_filter(
        candidates,
        executor,
        env_manager,
        timeout=settings.timeout,
        **(
            {"keywords": settings.banned_keywords}
            if settings.banned_keywords is not None
            else {}
        ),
    )
    funnel.post_processing.accepted = len(filtered.kept)
    for example_id, reason in filtered.dropped:
        funnel.post_processing.drop(reason.split(":", 1)[0])
        dropped.append((example_id, f"post:{reason}"))
    funnel.emitted = len(filtered.kept)

    funnel.check_conservation()
    return PipelineResult(examples=filtered.kept, funnel=funnel, dropped=dropped)
