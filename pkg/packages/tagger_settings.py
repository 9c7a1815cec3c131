"""
Tagger process settings.

Process-wide knobs that are not part of a training run's configuration:
worker threads, logging, and runtime invariant checks. Read from environment
variables (and an optional .env file).
"""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class TaggerSettings(BaseSettings):
    """
    Tagger settings from environment variables.

    Environment Variables:
        TAGGER_THREADS: Worker cap for evaluation fan-out (default: 1)
        TAGGER_LOG_LEVEL: Log level (default: INFO)
        TAGGER_LOG_JSON: Render logs as JSON (default: False)
        TAGGER_LOG_FILE: Optional log file in addition to stderr
        TAGGER_DEBUG_INVARIANTS: Check the mask simplex after every iteration (default: True)

    Usage:
        settings = get_tagger_settings()
        print(f"Evaluating with {settings.threads} workers")
    """

    model_config = SettingsConfigDict(
        env_prefix="TAGGER_",
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    threads: int = Field(default=1, ge=1, le=256, description="Evaluation worker cap")

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Log level"
    )
    log_json: bool = Field(default=False, description="Render logs as JSON lines")
    log_file: str | None = Field(default=None, description="Optional log file path")

    debug_invariants: bool = Field(
        default=True, description="Assert the mask simplex after every iteration"
    )


# Global settings instance (singleton pattern)
_settings_instance: TaggerSettings | None = None


def get_tagger_settings(force_reload: bool = False) -> TaggerSettings:
    """
    Get global Tagger settings singleton.

    Args:
        force_reload: Force reload from environment (useful for testing)

    Returns:
        TaggerSettings instance
    """
    global _settings_instance

    if _settings_instance is None or force_reload:
        _settings_instance = TaggerSettings()

    return _settings_instance


def reset_tagger_settings() -> None:
    """Reset global settings instance (for testing)."""
    global _settings_instance
    _settings_instance = None
