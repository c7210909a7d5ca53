"""Serve the study UI's backend over the frozen replay dataset.

Used by the frontend flow test: grading runs through the fake execution shim
so no sandbox build is needed, and a JSON map of example id -> a completion
that passes every test set is written out so the node side can make correct
submissions without knowing any Python. Binds the requested port (0 picks a
free one) and prints {"port": N} on stdout before serving.
"""

import argparse
import json
import socket
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO_ROOT / "src"))

import uvicorn

from benchforge import slots
from benchforge.executor import Executor
from benchforge.pipeline import load_dataset
from benchforge.studyserver import create_app


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--log", required=True)
    parser.add_argument("--solutions-out", required=True)
    args = parser.parse_args()

    examples = load_dataset(REPO_ROOT / "tests" / "fixtures" / "replay" / "dataset.jsonl")
    solutions = {
        ex.id: slots.strip_markers(slots.assemble(ex.frame, ex.target))
        for ex in examples
    }
    Path(args.solutions_out).write_text(
        json.dumps(solutions, sort_keys=True), encoding="utf-8"
    )

    executor = Executor(shim_path=str(REPO_ROOT / "tests" / "fakeshim.py"))
    app = create_app(examples, executor, log_path=args.log)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind(("127.0.0.1", args.port))
    sock.listen(128)
    print(json.dumps({"port": sock.getsockname()[1]}), flush=True)
    uvicorn.run(app, fd=sock.fileno(), log_level="warning")


if __name__ == "__main__":
    main()
