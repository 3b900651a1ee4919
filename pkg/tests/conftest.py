"""Shared pytest configuration."""

import pytest

from input_inference.settings import reset_settings


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: marks long-running acceptance experiments")


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless explicitly requested."""
    if "slow" not in (config.getoption("-m", default=None) or ""):
        skip_slow = pytest.mark.skip(reason="use -m slow to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test reads settings from its own environment."""
    for name in ("I2C_LOG_LEVEL", "I2C_WORKERS", "I2C_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()
