from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal


class MeroSettings(BaseSettings):
    """Process-wide settings, read from MERO_* environment variables or .env."""

    # Seeds
    seed_offset: int = 0  # shifts every run seed, used for CI sharding

    # Logging and progress
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    show_progress: bool = False

    # Evaluation defaults
    eval_samples: int = 10_000
    rstar_train_n: int = 100_000
    rstar_eval_n: int = 100_000

    # Gradient bound pilot
    pilot_draws: int = 1000
    gradient_percentile: float = 99.0

    # Outputs
    record_wall_clock: bool = True
    adult_cache_name: str = "adult.groups"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MERO_",
        extra="ignore"
    )

# Create a singleton instance
settings = MeroSettings()

def update_settings(**kwargs) -> None:
    """Update the process-wide settings."""
    global settings
    settings = MeroSettings(**{**settings.model_dump(), **kwargs})


def get_settings() -> MeroSettings:
    """Return the current settings object (survives update_settings rebinding)."""
    return settings
