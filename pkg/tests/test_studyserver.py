"""Study server: problem views, session lifecycle, grading parity with the
generator harness, the append-only event log, and summary statistics."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from benchforge import slots
from benchforge.evalharness import grade_completion
from benchforge.pipeline import load_dataset
from benchforge.pipeline.model import EvalExample, Instruction
from benchforge.pipeline.model import TestSet as ExampleTestSet
from benchforge.studyserver import RATING_KEYS, create_app, replay_log

REPLAY_DIR = Path(__file__).parent / "fixtures" / "replay"

SCALE_CODE = (
    "def helper(x):\n"
    "    return x + 1\n"
    "\n"
    "\n"
    "def scale(values, factor):\n"
    '    """Multiply every value by factor."""\n'
    "    out = []\n"
    "    for v in values:\n"
    "        out.append(v * factor)\n"
    "    return out\n"
)

SCALE_TESTS = (
    "def test_scale():\n"
    "    assert scale([1, 2], 3) == [3, 6]\n"
    "    assert scale([], 5) == []\n"
    "    assert scale([2], 0) == [0]\n"
    "\n"
    "\n"
    "test_scale()\n"
)

CORRECT_CODE = (
    "def helper(x):\n"
    "    return x + 1\n"
    "\n"
    "\n"
    "def scale(values, factor):\n"
    "    return [v * factor for v in values]\n"
)

WRONG_CODE = (
    "def scale(values, factor):\n"
    "    return list(values)\n"
)


def make_example():
    split = slots.split_target(SCALE_CODE, "scale")
    return EvalExample(
        id="demo:demo.py:scale",
        frame=split.frame,
        target=split.target,
        header=split.header,
        function_name="scale",
        instruction=Instruction("Scales a list.", "values, factor.", "New list."),
        test_sets=[ExampleTestSet(name="original", code=SCALE_TESTS, origin="generated")],
    )


def ratings(value: int) -> dict:
    return {key: value for key in RATING_KEYS}


GOOD_OUTCOME = {
    "ratings": ratings(4),
    "used_external_resources": False,
    "gave_up": False,
}


@pytest.fixture()
def client(executor, tmp_path):
    app = create_app(
        [make_example()],
        executor,
        log_path=tmp_path / "sessions.jsonl",
        timeout=10.0,
        clock=iter(range(10_000)).__next__,
    )
    with TestClient(app) as c:
        c.log_path = tmp_path / "sessions.jsonl"
        yield c


def start(client, example_id="demo:demo.py:scale", alias="p1"):
    response = client.post(
        "/sessions", json={"participant_alias": alias, "example_id": example_id}
    )
    assert response.status_code == 200
    return response.json()["session_id"]


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_problem_list(client):
    problems = client.get("/problems").json()["problems"]
    assert problems == [
        {"example_id": "demo:demo.py:scale", "function_name": "scale"}
    ]


def test_problem_view_blanks_target_and_hides_tests(client):
    response = client.get("/problems/demo:demo.py:scale")
    assert response.status_code == 200
    body = response.json()
    assert body["instruction"]["functionality"] == "Scales a list."
    assert body["test_set_count"] == 1
    assert "    ...\n" in body["code"]
    text = response.text
    assert "out.append(v * factor)" not in text  # reference body hidden
    assert "scale([1, 2], 3)" not in text  # test cases hidden
    assert "assert" not in text


def test_problem_view_unknown_example(client):
    assert client.get("/problems/nope").status_code == 404


def test_problem_view_with_slashed_id(executor):
    examples = load_dataset(REPLAY_DIR / "dataset.jsonl")
    app = create_app(examples[:1], executor)
    with TestClient(app) as client:
        response = client.get(f"/problems/{examples[0].id}")
        assert response.status_code == 200
        assert response.json()["example_id"] == examples[0].id


def test_session_against_unknown_example(client):
    response = client.post(
        "/sessions", json={"participant_alias": "p1", "example_id": "nope"}
    )
    assert response.status_code == 404


def test_submit_grade_and_close(client):
    sid = start(client)
    wrong = client.post(f"/sessions/{sid}/submissions", json={"code": WRONG_CODE})
    assert wrong.status_code == 200
    assert wrong.json()["passed"] is False
    assert wrong.json()["status"] == "failed_assert"

    right = client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
    assert right.json()["passed"] is True
    assert right.json()["index"] == 1

    closed = client.post(f"/sessions/{sid}/outcome", json=GOOD_OUTCOME)
    assert closed.json() == {"session_id": sid, "solved": True}

    summary = client.get("/summary").json()
    assert summary["solve_rate"] == 1.0
    assert summary["first_submission_solve_rate"] == 0.0
    assert summary["revisions_histogram"] == {"1": 1}
    assert summary["accuracy_by_revision"] == [0.0, 1.0, 1.0, 1.0, 1.0]


def test_closed_session_rejects_submissions_and_second_outcome(client):
    sid = start(client)
    client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
    client.post(f"/sessions/{sid}/outcome", json=GOOD_OUTCOME)
    late = client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
    assert late.status_code == 409
    again = client.post(f"/sessions/{sid}/outcome", json=GOOD_OUTCOME)
    assert again.status_code == 409


def test_unknown_session(client):
    assert client.post("/sessions/zzz/submissions", json={"code": "x"}).status_code == 404
    assert client.post("/sessions/zzz/outcome", json=GOOD_OUTCOME).status_code == 404


def test_outcome_validation(client):
    sid = start(client)
    missing = dict(GOOD_OUTCOME, ratings={"difficulty": 3})
    assert client.post(f"/sessions/{sid}/outcome", json=missing).status_code == 422
    out_of_range = dict(GOOD_OUTCOME, ratings=ratings(6))
    assert client.post(f"/sessions/{sid}/outcome", json=out_of_range).status_code == 422


def test_in_flight_submission_locks_the_session(client):
    sid = start(client)
    study = client.app.state.study
    lock = study.sessions[sid].lock
    assert lock.acquire(blocking=False)
    try:
        busy = client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
        assert busy.status_code == 409
    finally:
        lock.release()
    ok = client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
    assert ok.status_code == 200


def test_grading_parity_with_generator_harness(client, executor):
    example = make_example()
    for code in (CORRECT_CODE, WRONG_CODE):
        sid = start(client)
        served = client.post(f"/sessions/{sid}/submissions", json={"code": code}).json()
        direct = grade_completion(executor, example, code)
        assert served["passed"] == direct.passed
        assert served["status"] == direct.status
        assert served["failed_assert"] == direct.failed_assert


def test_event_log_records_and_replays(client):
    sid = start(client)
    client.post(f"/sessions/{sid}/submissions", json={"code": WRONG_CODE})
    client.post(f"/sessions/{sid}/submissions", json={"code": CORRECT_CODE})
    client.post(f"/sessions/{sid}/outcome", json=GOOD_OUTCOME)

    events = [json.loads(line) for line in client.log_path.read_text().splitlines()]
    assert [e["event"] for e in events] == [
        "session_started",
        "submission_graded",
        "submission_graded",
        "outcome_recorded",
    ]
    assert events[0]["data"]["participant_alias"] == "p1"
    assert events[2]["data"]["passed"] is True
    assert replay_log(client.log_path) == client.get("/summary").json()


def test_summary_over_mixed_sessions(client):
    # A: first-try solve. B: two failures then solve, used external resources.
    # C: one failure then gave up. D: first-try solve.
    a = start(client, alias="a")
    client.post(f"/sessions/{a}/submissions", json={"code": CORRECT_CODE})
    client.post(
        f"/sessions/{a}/outcome",
        json={"ratings": ratings(4), "used_external_resources": False, "gave_up": False},
    )

    b = start(client, alias="b")
    for _ in range(2):
        client.post(f"/sessions/{b}/submissions", json={"code": WRONG_CODE})
    client.post(f"/sessions/{b}/submissions", json={"code": CORRECT_CODE})
    client.post(
        f"/sessions/{b}/outcome",
        json={"ratings": ratings(3), "used_external_resources": True, "gave_up": False},
    )

    c = start(client, alias="c")
    client.post(f"/sessions/{c}/submissions", json={"code": WRONG_CODE})
    client.post(
        f"/sessions/{c}/outcome",
        json={"ratings": ratings(2), "used_external_resources": False, "gave_up": True},
    )

    d = start(client, alias="d")
    client.post(f"/sessions/{d}/submissions", json={"code": CORRECT_CODE})
    client.post(
        f"/sessions/{d}/outcome",
        json={"ratings": ratings(5), "used_external_resources": False, "gave_up": False},
    )

    summary = client.get("/summary").json()
    assert summary["sessions"] == 4
    assert summary["closed"] == 4
    assert summary["solved"] == 3
    assert summary["solve_rate"] == 0.75
    assert summary["first_submission_solve_rate"] == 0.5
    assert summary["revisions_histogram"] == {"0": 2, "2": 1}
    assert summary["accuracy_by_revision"] == [0.5, 0.5, 0.75, 0.75, 0.75]
    assert summary["external_resource_rate"] == 0.25
    assert summary["gave_up_rate"] == 0.25
    assert summary["mean_ratings"] == {key: 3.5 for key in RATING_KEYS}
    assert replay_log(client.log_path) == summary


def test_ui_mount_serves_static_files_behind_the_api(executor, tmp_path):
    ui = tmp_path / "ui"
    (ui / "dist").mkdir(parents=True)
    (ui / "index.html").write_text("<html><body>study page</body></html>")
    (ui / "dist" / "main.js").write_text("export const x = 1;\n")
    app = create_app([make_example()], executor, ui_dir=ui)
    with TestClient(app) as client:
        assert "study page" in client.get("/").text
        assert "const x" in client.get("/dist/main.js").text
        # API routes keep priority over the static mount
        assert client.get("/health").json() == {"status": "ok"}
        assert client.get("/problems").status_code == 200


def test_no_ui_mount_without_a_directory(client):
    assert client.get("/").status_code == 404
