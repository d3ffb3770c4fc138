from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def paper_config_path() -> Path:
    return REPO_ROOT / "config" / "paper-4.2.toml"


@pytest.fixture(scope="session")
def paper_trace_path() -> Path:
    return REPO_ROOT / "traces" / "paper-scan-4.2"
