"""
Application configuration using Pydantic Settings.
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Lab settings loaded from environment variables (prefix ``BDSLAB_``)."""

    model_config = SettingsConfigDict(
        env_prefix="BDSLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = Field(default="bdslab")
    app_env: str = Field(default="development")
    debug: bool = Field(default=False)
    log_level: str = Field(default="WARNING")

    # Output
    output_dir: str = Field(default=".")

    # Simulator defaults
    default_rounds: int = Field(default=1_000_000, ge=1)
    default_seed: int = Field(default=20230501, ge=0)
    default_replicas: int = Field(default=8, ge=1)
    default_share_difficulty: int = Field(default=100, ge=1)
    chunk_size: int = Field(default=65_536, ge=1)

    # Parallelism (1 = run in-process)
    workers: int = Field(default=1, ge=1)

    # Game enumeration
    max_game_miners: int = Field(default=12, ge=1)

    # Reference table tolerances, in percentage points
    reference_tolerance_pp: float = Field(default=0.15, gt=0)
    reference_sim_tolerance_pp: float = Field(default=0.3, gt=0)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
