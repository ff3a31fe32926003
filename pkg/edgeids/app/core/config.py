from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

PACKAGE_ROOT = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    """
    Process-wide settings, loaded from environment variables (prefix EDGEIDS_) or a .env file.
    Per-run knobs live in the run configuration file instead (see run_config.py).
    """
    PROJECT_NAME: str = "Edge IDS Bench"
    VERSION: str = "0.1.0"

    LOG_LEVEL: str = "INFO"

    # Shipped data files (published comparison tables, schema mapping, example run config)
    FIXTURE_DIR: Path = PACKAGE_ROOT / "fixtures"
    DEFAULT_SCHEMA_FILE: str = "botiot_schema.txt"
    DEFAULT_RUN_CONFIG: str = "run.example.cfg"

    # Output layout of a run directory
    MODEL_FILE_SUFFIX: str = ".iids"
    MODELS_SUBDIR: str = "models"
    HOLDOUT_STEM: str = "holdout"
    DEFAULT_RUN_DIR: Path = Path("edgeids-run")

    model_config = SettingsConfigDict(
        env_prefix="EDGEIDS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    def fixture(self, name: str) -> Path:
        return self.FIXTURE_DIR / name


@lru_cache
def get_settings() -> Settings:
    """Return application settings, cached for performance."""
    return Settings()
