"""
Configuration Module
All tunables are read from environment variables (prefix NOMSOS_) or a .env file.
"""

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_FIXTURES_DIR = Path(__file__).parent.parent / "data"


class Settings(BaseSettings):
    """Application settings from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="NOMSOS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="WARNING")
    log_file: Optional[str] = Field(default=None)

    # Derivation bounds
    fresh_slack: int = Field(default=2, ge=0)
    fuel: int = Field(default=16, ge=1)

    # Property suites
    seed: int = Field(default=2017)
    selftest_count: int = Field(default=50, ge=1)

    # Fixtures and output
    fixtures_dir: Path = Field(default=DEFAULT_FIXTURES_DIR)
    json_indent: int = Field(default=2, ge=0)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Shortcut for accessing settings
settings = get_settings()
