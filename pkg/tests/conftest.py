import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
REPO_ROOT = TESTS_DIR.parent
FAKE_SHIM = TESTS_DIR / "fakeshim.py"
REAL_SHIM = REPO_ROOT / "shim" / "runner_shim.py"


@pytest.fixture(scope="session")
def fake_shim_path() -> str:
    return str(FAKE_SHIM)


@pytest.fixture(scope="session")
def real_shim_path() -> str:
    if not REAL_SHIM.exists():
        pytest.skip("production shim not built")
    return str(REAL_SHIM)


@pytest.fixture()
def executor(fake_shim_path):
    from benchforge.executor import Executor

    return Executor(shim_path=fake_shim_path)
