from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")

REPO = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def scenarios_dir() -> Path:
    return REPO / "scenarios"


@pytest.fixture(scope="session")
def setting1_path(scenarios_dir) -> Path:
    return scenarios_dir / "setting1.yaml"


@pytest.fixture(scope="session")
def minimal_path(scenarios_dir) -> Path:
    return scenarios_dir / "minimal.yaml"
