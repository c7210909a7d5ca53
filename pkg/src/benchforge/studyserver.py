"""Local web service for running human study sessions on benchmark examples.

Participants see the same blanked-out program a model would be prompted with
(instruction as the docstring, target body replaced by `...`) and submit
full-file solutions. Submissions are graded through the exact same candidate
assembly and test conjunction as model completions, so human and model solve
rates are directly comparable.

Every state change is appended to a JSONL event log; `replay_log` rebuilds
the summary from the log alone, so a finished study can be analyzed without
the server.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import InfraError
from .evalharness import (
    SampleOutcome,
    build_prompt_code,
    example_environment,
    grade_completion,
)
from .executor import Executor
from .pipeline.model import EvalExample

RATING_KEYS = (
    "difficulty",
    "instruction_clarity",
    "test_agreement",
    "code_naturalness",
)
MAX_REVISION_BUCKETS = 5


class SessionRequest(BaseModel):
    participant_alias: str
    example_id: str


class SubmissionRequest(BaseModel):
    code: str


class OutcomeRequest(BaseModel):
    ratings: dict[str, int]
    used_external_resources: bool
    gave_up: bool


@dataclass
class Session:
    id: str
    participant_alias: str
    example_id: str
    submissions: list[dict] = field(default_factory=list)
    outcome: dict | None = None
    first_passed_index: int | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def closed(self) -> bool:
        return self.outcome is not None

    @property
    def solved(self) -> bool:
        return self.first_passed_index is not None


def _submission_record(index: int, outcome: SampleOutcome) -> dict:
    return {
        "index": index,
        "passed": outcome.passed,
        "status": outcome.status,
        "failed_set": outcome.failed_set,
        "failed_assert": outcome.failed_assert,
        "error": outcome.error,
    }


class Study:
    """All mutable server state: sessions, grading, and the event log."""

    def __init__(
        self,
        examples: Sequence[EvalExample],
        executor: Executor,
        *,
        env_manager=None,
        log_path: str | Path | None = None,
        timeout: float = 10.0,
        clock=time.time,
    ):
        self.examples = {example.id: example for example in examples}
        if len(self.examples) != len(examples):
            raise ValueError("duplicate example ids")
        self.executor = executor
        self.env_manager = env_manager
        self.timeout = timeout
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self._state_lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        self._log_lock = threading.Lock()

    def _log(self, event: str, data: dict) -> None:
        if self._log_path is None:
            return
        record = {"event": event, "timestamp": self.clock(), "data": data}
        line = json.dumps(record, sort_keys=True, separators=(",", ":"))
        with self._log_lock:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def problem_view(self, example_id: str) -> dict:
        example = self.examples.get(example_id)
        if example is None:
            raise HTTPException(status_code=404, detail="unknown example")
        return {
            "example_id": example.id,
            "function_name": example.function_name,
            "instruction": {
                "functionality": example.instruction.functionality,
                "inputs": example.instruction.inputs,
                "outputs": example.instruction.outputs,
            },
            # count only: test code itself is never served
            "test_set_count": len(example.test_sets),
            "code": build_prompt_code(example),
        }

    def start_session(self, participant_alias: str, example_id: str) -> Session:
        if example_id not in self.examples:
            raise HTTPException(status_code=404, detail="unknown example")
        with self._state_lock:
            self._counter += 1
            session = Session(
                id=f"s{self._counter:04d}",
                participant_alias=participant_alias,
                example_id=example_id,
            )
            self.sessions[session.id] = session
        self._log(
            "session_started",
            {
                "session_id": session.id,
                "participant_alias": participant_alias,
                "example_id": example_id,
            },
        )
        return session

    def _session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def submit(self, session_id: str, code: str) -> dict:
        session = self._session(session_id)
        if session.closed:
            raise HTTPException(status_code=409, detail="session is closed")
        if not session.lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409, detail="a submission is already being graded"
            )
        try:
            example = self.examples[session.example_id]
            env = example_environment(self.env_manager, example)
            try:
                outcome = grade_completion(
                    self.executor, example, code, timeout=self.timeout, env=env
                )
            except InfraError as exc:
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            record = _submission_record(len(session.submissions), outcome)
            session.submissions.append(record)
            if outcome.passed and session.first_passed_index is None:
                session.first_passed_index = record["index"]
        finally:
            session.lock.release()
        self._log("submission_graded", {"session_id": session.id, **record})
        return record

    def record_outcome(self, session_id: str, request: OutcomeRequest) -> dict:
        session = self._session(session_id)
        if session.closed:
            raise HTTPException(status_code=409, detail="outcome already recorded")
        if sorted(request.ratings) != sorted(RATING_KEYS):
            raise HTTPException(
                status_code=422, detail=f"ratings must cover exactly {RATING_KEYS}"
            )
        bad = {k: v for k, v in request.ratings.items() if not 1 <= v <= 5}
        if bad:
            raise HTTPException(
                status_code=422, detail=f"ratings must be 1..5, got {bad}"
            )
        session.outcome = {
            "ratings": dict(request.ratings),
            "used_external_resources": request.used_external_resources,
            "gave_up": request.gave_up,
        }
        self._log(
            "outcome_recorded",
            {
                "session_id": session.id,
                "solved": session.solved,
                "first_passed_index": session.first_passed_index,
                "submissions": len(session.submissions),
                **session.outcome,
            },
        )
        return {"session_id": session.id, "solved": session.solved}

    def summary(self) -> dict:
        closed = [
            {
                "solved": s.solved,
                "first_passed_index": s.first_passed_index,
                "used_external_resources": s.outcome["used_external_resources"],
                "gave_up": s.outcome["gave_up"],
                "ratings": s.outcome["ratings"],
            }
            for s in self.sessions.values()
            if s.closed
        ]
        return _summarize(len(self.sessions), closed)


def _summarize(total_sessions: int, closed: list[dict]) -> dict:
    n = len(closed)
    solved = [s for s in closed if s["solved"]]
    histogram: dict[str, int] = {}
    for s in solved:
        histogram[str(s["first_passed_index"])] = (
            histogram.get(str(s["first_passed_index"]), 0) + 1
        )
    accuracy = []
    for r in range(MAX_REVISION_BUCKETS):
        within = sum(1 for s in solved if s["first_passed_index"] <= r)
        accuracy.append(within / n if n else 0.0)
    mean_ratings = {}
    if n:
        for key in RATING_KEYS:
            mean_ratings[key] = sum(s["ratings"][key] for s in closed) / n
    return {
        "sessions": total_sessions,
        "closed": n,
        "solved": len(solved),
        "solve_rate": len(solved) / n if n else 0.0,
        "first_submission_solve_rate": (
            sum(1 for s in solved if s["first_passed_index"] == 0) / n if n else 0.0
        ),
        "revisions_histogram": dict(sorted(histogram.items())),
        "accuracy_by_revision": accuracy,
        "external_resource_rate": (
            sum(1 for s in closed if s["used_external_resources"]) / n if n else 0.0
        ),
        "gave_up_rate": sum(1 for s in closed if s["gave_up"]) / n if n else 0.0,
        "mean_ratings": mean_ratings,
    }


def replay_log(path: str | Path) -> dict:
    """Recompute the study summary from the append-only event log."""
    sessions: dict[str, dict] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            event, data = record["event"], record["data"]
            if event == "session_started":
                sessions[data["session_id"]] = {"closed": False}
            elif event == "outcome_recorded":
                sessions[data["session_id"]] = {
                    "closed": True,
                    "solved": data["solved"],
                    "first_passed_index": data["first_passed_index"],
                    "used_external_resources": data["used_external_resources"],
                    "gave_up": data["gave_up"],
                    "ratings": data["ratings"],
                }
    closed = [s for s in sessions.values() if s["closed"]]
    return _summarize(len(sessions), closed)


def create_app(
    examples: Sequence[EvalExample],
    executor: Executor,
    *,
    env_manager=None,
    log_path: str | Path | None = None,
    timeout: float = 10.0,
    clock=time.time,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    study = Study(
        examples,
        executor,
        env_manager=env_manager,
        log_path=log_path,
        timeout=timeout,
        clock=clock,
    )
    app = FastAPI(title="benchforge study server")
    app.state.study = study

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/problems")
    def list_problems() -> dict:
        return {
            "problems": [
                {"example_id": ex.id, "function_name": ex.function_name}
                for ex in study.examples.values()
            ]
        }

    @app.get("/problems/{example_id:path}")
    def get_problem(example_id: str) -> dict:
        return study.problem_view(example_id)

    @app.post("/sessions")
    def start_session(request: SessionRequest) -> dict:
        session = study.start_session(request.participant_alias, request.example_id)
        return {"session_id": session.id, "example_id": session.example_id}

    @app.post("/sessions/{session_id}/submissions")
    def submit(session_id: str, request: SubmissionRequest) -> dict:
        return study.submit(session_id, request.code)

    @app.post("/sessions/{session_id}/outcome")
    def record_outcome(session_id: str, request: OutcomeRequest) -> dict:
        return study.record_outcome(session_id, request)

    @app.get("/summary")
    def summary() -> dict:
        return study.summary()

    if ui_dir is not None:
        # same-origin hosting for the built frontend; API routes keep priority
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
