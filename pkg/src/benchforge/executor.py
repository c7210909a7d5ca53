"""Sandboxed execution of candidate programs against test sets.

The executor never runs example code in-process. Each run writes the program
and its tests to a fresh scratch directory and delegates to an external shim
process, which prints a single-line JSON verdict as the last line of stdout:

    {"status": ..., "asserts": [0/1, ...], "coverage": float|null, "error": str|null}

The supervisor adds what the shim cannot guarantee about itself: a hard kill
shortly after the soft timeout, a scrubbed environment, and mapping of shim
crashes to infra_error so broken infrastructure is never scored as a failing
example.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import EnvironmentBuildError

logger = logging.getLogger(__name__)

SOLUTION_FILENAME = "solution_under_test"
TESTS_FILENAME = "tests"

STATUS_PASSED = "passed"
STATUS_FAILED_ASSERT = "failed_assert"
STATUS_COMPILE_ERROR = "compile_error"
STATUS_RUNTIME_ERROR = "runtime_error"
STATUS_TIMEOUT = "timeout"
STATUS_INFRA_ERROR = "infra_error"

# Statuses a shim may legitimately report about the program under test.
SHIM_STATUSES = frozenset(
    (STATUS_PASSED, STATUS_FAILED_ASSERT, STATUS_COMPILE_ERROR, STATUS_RUNTIME_ERROR, STATUS_TIMEOUT)
)
ALL_STATUSES = SHIM_STATUSES | {STATUS_INFRA_ERROR}

# Environment variable the shim honors by disabling socket access.
NO_NETWORK_ENV = "SANDBOX_DISABLE_NETWORK"

_TAIL_CHARS = 4000


@dataclass
class ExecutionJob:
    solution_code: str
    tests_code: str
    timeout: float = 10.0
    coverage: bool = False


@dataclass
class ExecutionReport:
    status: str
    asserts: list[int] = field(default_factory=list)
    coverage: float | None = None
    error: str | None = None
    stdout_tail: str = ""
    stderr_tail: str = ""
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == STATUS_PASSED

    @property
    def per_assert(self) -> list[tuple[int, bool]]:
        """1-based assert index paired with its outcome."""
        return [(i + 1, bool(flag)) for i, flag in enumerate(self.asserts)]

    def first_failed_assert(self) -> int | None:
        for index, ok in self.per_assert:
            if not ok:
                return index
        return None

    def to_record(self) -> dict:
        return {
            "status": self.status,
            "asserts": list(self.asserts),
            "coverage": self.coverage,
            "error": self.error,
        }


@dataclass
class ExecutionEnvironment:
    """A resolved dependency set: a directory for PYTHONPATH, or nothing."""

    pythonpath: str | None
    deps: tuple[str, ...]


_REQ_NAME_RE = re.compile(r"^\s*([A-Za-z0-9][A-Za-z0-9._-]*)")


def _requirement_name(req: str) -> str:
    found = _REQ_NAME_RE.match(req)
    if not found:
        raise EnvironmentBuildError(f"unparseable requirement: {req!r}")
    # PEP 503 normalization
    return re.sub(r"[-_.]+", "-", found.group(1)).lower()


def check_pin_conflicts(deps: Sequence[str]) -> None:
    """Reject dependency lists that pin the same package to two versions."""
    pins: dict[str, str] = {}
    for req in deps:
        if "==" not in req:
            continue
        name = _requirement_name(req)
        version = req.split("==", 1)[1].strip()
        if name in pins and pins[name] != version:
            raise EnvironmentBuildError(
                f"conflicting pins for {name}: =={pins[name]} vs =={version}"
            )
        pins[name] = version


def merge_deps(dep_lists: Sequence[Sequence[str]]) -> list[str]:
    """Union of several dependency lists, sorted, with pin conflicts rejected."""
    merged = sorted({req for deps in dep_lists for req in deps})
    check_pin_conflicts(merged)
    return merged


class EnvironmentManager:
    """Builds and caches dependency directories installed with pip --target.

    Environments are keyed by the sorted dependency list, so two examples
    with the same requirements share one directory. `pip_args` lets tests
    point pip at a local wheel directory (--no-index --find-links ...).
    """

    def __init__(
        self,
        root: str | Path,
        python: str = sys.executable,
        pip_args: Sequence[str] = (),
    ) -> None:
        self.root = Path(root)
        self.python = python
        self.pip_args = list(pip_args)

    def get(self, deps: Sequence[str]) -> ExecutionEnvironment:
        resolved = sorted(set(deps))
        if not resolved:
            return ExecutionEnvironment(pythonpath=None, deps=())
        check_pin_conflicts(resolved)
        key = hashlib.sha256(json.dumps(resolved).encode("utf-8")).hexdigest()[:16]
        env_dir = self.root / key
        if not env_dir.exists():
            self.root.mkdir(parents=True, exist_ok=True)
            staging = env_dir.with_suffix(".partial")
            cmd = [
                self.python,
                "-m",
                "pip",
                "install",
                "--quiet",
                "--no-input",
                "--disable-pip-version-check",
                "--target",
                str(staging),
                *self.pip_args,
                *resolved,
            ]
            logger.info("building environment %s for %s", key, resolved)
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                raise EnvironmentBuildError(
                    f"pip install failed for {resolved}: {proc.stderr[-_TAIL_CHARS:]}"
                )
            staging.rename(env_dir)
        return ExecutionEnvironment(pythonpath=str(env_dir), deps=tuple(resolved))


def _scrubbed_env(workdir: str, pythonpath: str | None) -> dict[str, str]:
    """Minimal child environment: no inherited credentials or proxies."""
    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "LANG": os.environ.get("LANG", "C.UTF-8"),
        "HOME": workdir,
        "TMPDIR": workdir,
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONHASHSEED": "0",
        NO_NETWORK_ENV: "1",
    }
    if pythonpath:
        env["PYTHONPATH"] = pythonpath
    return env


class Executor:
    """Runs one (program, tests) pair per shim process.

    `grace` is how long past the soft timeout the shim gets to report before
    the supervisor kills it; total wall time never exceeds timeout + grace.
    """

    def __init__(
        self,
        shim_path: str | Path,
        python: str = sys.executable,
        grace: float = 1.0,
    ) -> None:
        self.shim_path = str(shim_path)
        self.python = python
        self.grace = grace

    def run(self, job: ExecutionJob, env: ExecutionEnvironment | None = None) -> ExecutionReport:
        started = time.monotonic()
        with tempfile.TemporaryDirectory(prefix="benchforge-run-") as workdir:
            solution_path = Path(workdir) / SOLUTION_FILENAME
            tests_path = Path(workdir) / TESTS_FILENAME
            solution_path.write_text(job.solution_code, "utf-8")
            tests_path.write_text(job.tests_code, "utf-8")
            cmd = [
                self.python,
                self.shim_path,
                str(solution_path),
                str(tests_path),
                "--timeout-soft",
                f"{job.timeout:g}",
                "--coverage",
                "on" if job.coverage else "off",
            ]
            child_env = _scrubbed_env(workdir, env.pythonpath if env else None)
            try:
                proc = subprocess.run(
                    cmd,
                    capture_output=True,
                    text=True,
                    cwd=workdir,
                    env=child_env,
                    timeout=job.timeout + self.grace,
                )
            except subprocess.TimeoutExpired as exc:
                duration = time.monotonic() - started
                return ExecutionReport(
                    status=STATUS_TIMEOUT,
                    error=f"killed by supervisor after {exc.timeout:g}s",
                    stdout_tail=_tail(exc.stdout),
                    stderr_tail=_tail(exc.stderr),
                    duration=duration,
                )
        duration = time.monotonic() - started
        return self._interpret(proc, duration)

    def _interpret(self, proc: subprocess.CompletedProcess, duration: float) -> ExecutionReport:
        stdout_tail = _tail(proc.stdout)
        stderr_tail = _tail(proc.stderr)
        if proc.returncode != 0:
            return ExecutionReport(
                status=STATUS_INFRA_ERROR,
                error=f"shim exited with code {proc.returncode}",
                stdout_tail=stdout_tail,
                stderr_tail=stderr_tail,
                duration=duration,
            )
        verdict = _parse_verdict(proc.stdout)
        if verdict is None:
            return ExecutionReport(
                status=STATUS_INFRA_ERROR,
                error="shim produced no valid verdict line",
                stdout_tail=stdout_tail,
                stderr_tail=stderr_tail,
                duration=duration,
            )
        return ExecutionReport(
            status=verdict["status"],
            asserts=verdict["asserts"],
            coverage=verdict["coverage"],
            error=verdict["error"],
            stdout_tail=stdout_tail,
            stderr_tail=stderr_tail,
            duration=duration,
        )


def _tail(text: str | bytes | None) -> str:
    if text is None:
        return ""
    if isinstance(text, bytes):
        text = text.decode("utf-8", "replace")
    return text[-_TAIL_CHARS:]


def _parse_verdict(stdout: str | None) -> dict | None:
    if not stdout:
        return None
    lines = [line for line in stdout.splitlines() if line.strip()]
    if not lines:
        return None
    try:
        verdict = json.loads(lines[-1])
    except json.JSONDecodeError:
        return None
    if not isinstance(verdict, dict):
        return None
    status = verdict.get("status")
    if status not in SHIM_STATUSES:
        return None
    asserts = verdict.get("asserts")
    if not isinstance(asserts, list) or any(flag not in (0, 1) for flag in asserts):
        return None
    coverage = verdict.get("coverage")
    if coverage is not None and not isinstance(coverage, (int, float)):
        return None
    error = verdict.get("error")
    if error is not None and not isinstance(error, str):
        return None
    return {
        "status": status,
        "asserts": [int(flag) for flag in asserts],
        "coverage": None if coverage is None else float(coverage),
        "error": error,
    }


@dataclass
class ConjunctionOutcome:
    """Result of running one program against every test set of an example."""

    passed: bool
    reports: list[ExecutionReport]
    infra: bool

    def first_failure(self) -> int | None:
        for i, report in enumerate(self.reports):
            if not report.passed:
                return i
        return None


def run_test_sets(
    executor: Executor,
    solution_code: str,
    test_sets: Sequence[str],
    timeout: float = 10.0,
    env: ExecutionEnvironment | None = None,
    coverage: bool = False,
) -> ConjunctionOutcome:
    """A program passes an example only if every test set passes.

    All sets always run (no short-circuit), so the outcome and the report
    list are independent of set ordering.
    """
    if not test_sets:
        raise ValueError("an example must have at least one test set")
    reports = [
        executor.run(
            ExecutionJob(
                solution_code=solution_code,
                tests_code=tests_code,
                timeout=timeout,
                coverage=coverage,
            ),
            env=env,
        )
        for tests_code in test_sets
    ]
    return ConjunctionOutcome(
        passed=all(r.passed for r in reports),
        reports=reports,
        infra=any(r.status == STATUS_INFRA_ERROR for r in reports),
    )
