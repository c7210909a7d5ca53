"""Final filtering before a dataset is emitted.

Two gates: a substring scan for keywords whose presence makes an example
unsafe or flaky to execute (process control, file-system and I/O access),
and a re-execution of every surviving example inside the one merged
dependency environment the released dataset will actually use.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .. import slots
from ..errors import InfraError
from ..executor import EnvironmentManager, Executor, ExecutionEnvironment, merge_deps, run_test_sets
from .model import EvalExample

logger = logging.getLogger(__name__)

# Substrings that disqualify an example wherever they appear (program or
# tests). Kept as one flat tuple; order is the scan/report order.
BANNED_KEYWORDS: tuple[str, ...] = (
    "os.kill",
    "terminate",
    "subprocess.call(['kill',",
    "subprocess.call(['rm',",
    "subprocess.call(['rmdir',",
    'subprocess.call(["kill",',
    'subprocess.call(["rm",',
    'subprocess.call(["rmdir",',
    "sys.exit",
    "os.unlink",
    ".unlink",
    ".rmdir",
    "os.remove",
    "os.removedirs",
    "os.rmdir",
    "os.system",
    "rmtree",
    "send2trash",
    "open(",
    ".read",
    ".write",
    ".load",
    ".dump",
    "shutil.",
    "glob.",
    "os.path.",
    "os.remove(",
    "os.rename(",
    "os.rmdir(",
    "os.mkdir(",
    "os.makedirs(",
    "os.listdir(",
    ".readlines(",
    ".writelines(",
    ".seek(",
    ".tell(",
)


def scan_banned(text: str, keywords: Sequence[str] = BANNED_KEYWORDS) -> list[str]:
    """Keywords present in `text`, in keyword-list order."""
    return [kw for kw in keywords if kw in text]


def scan_example(example: EvalExample, keywords: Sequence[str] = BANNED_KEYWORDS) -> list[str]:
    texts = [example.frame, example.target] + [ts.code for ts in example.test_sets]
    hits: list[str] = []
    for kw in keywords:
        if any(kw in text for text in texts):
            hits.append(kw)
    return hits


@dataclass
class FilterOutcome:
    kept: list[EvalExample]
    dropped: list[tuple[str, str]]  # (example_id, reason)
    environment: ExecutionEnvironment | None = None
    dropped_reasons: dict[str, int] = field(default_factory=dict)

    def note_drop(self, example_id: str, reason: str) -> None:
        self.dropped.append((example_id, reason))
        key = reason.split(":", 1)[0]
        self.dropped_reasons[key] = self.dropped_reasons.get(key, 0) + 1


def final_filter(
    examples: Sequence[EvalExample],
    executor: Executor,
    env_manager: EnvironmentManager,
    timeout: float = 10.0,
    keywords: Sequence[str] = BANNED_KEYWORDS,
) -> FilterOutcome:
    """Drop keyword offenders, then re-run everything in the merged
    environment and drop what no longer passes.

    A dependency conflict in the merged environment or an executor
    infrastructure failure is fatal: it invalidates the whole emission, not
    one example, so it raises instead of dropping.
    """
    outcome = FilterOutcome(kept=[], dropped=[])
    survivors: list[EvalExample] = []
    for example in examples:
        hits = scan_example(example, keywords)
        if hits:
            outcome.note_drop(example.id, f"banned_keyword:{hits[0]}")
        else:
            survivors.append(example)

    merged = merge_deps([ex.dependencies for ex in survivors])
    environment = env_manager.get(merged)
    outcome.environment = environment

    for example in survivors:
        program = slots.assemble(example.frame, example.target)
        result = run_test_sets(
            executor,
            program,
            [ts.code for ts in example.test_sets],
            timeout=timeout,
            env=environment,
        )
        if result.infra:
            raise InfraError(
                f"infrastructure failure re-executing {example.id}; aborting emission"
            )
        if result.passed:
            outcome.kept.append(example)
        else:
            outcome.note_drop(example.id, "shared_env_failure")
    return outcome
