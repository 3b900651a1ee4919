"""Runtime settings loaded from environment variables."""

from __future__ import annotations

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Process-level settings.

    All settings are loaded from environment variables prefixed with I2C_, or from a
    ``.env`` file in the working directory.
    """

    model_config = SettingsConfigDict(env_prefix="I2C_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    workers: int = Field(default=1, ge=1)
    output_dir: Path = Path("runs")


_settings: RuntimeSettings | None = None


def get_settings() -> RuntimeSettings:
    """Return the process-wide settings, loading them on first use."""
    global _settings
    if _settings is None:
        _settings = RuntimeSettings()
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None
