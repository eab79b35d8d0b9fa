import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_REPO = ROOT / "fixture_repo"
FIXTURES = ROOT / "fixtures"
SCENARIOS = ROOT / "scenarios"


@pytest.fixture(scope="session")
def fixture_repo_dir() -> Path:
    return FIXTURE_REPO


@pytest.fixture(scope="session")
def method_oracle() -> dict:
    data = json.loads((FIXTURES / "java_method_oracle.json").read_text())
    data.pop("_comment", None)
    return data
