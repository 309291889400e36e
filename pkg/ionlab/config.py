"""Configuration management for the ionization laboratory."""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ionlab.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Laboratory defaults loaded from environment variables."""

    # Logging
    log_level: str = "INFO"

    # Runner Configuration
    seed: int = Field(default=20121207, ge=0, lt=2**64)
    jobs: int = Field(default=0, ge=0)  # 0 = one worker per processor
    out_dir: str = "results"
    output_format: Literal["json", "csv", "both"] = "both"

    # Search Hyperparameters
    restarts: int = Field(default=8, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    max_iterations: int = Field(default=400, ge=1)

    # Radial Measure Grid
    measure_grid_points: int = Field(default=200, ge=1)
    measure_r_min: float = Field(default=1e-2, gt=0)
    measure_r_max: float = Field(default=1e2, gt=0)

    # Thomas-Fermi Solver
    tf_mixing: Literal["newton", "linear"] = "newton"
    tf_alpha: float = Field(default=0.3, gt=0, le=1)
    tf_grid_points: int = Field(default=2000, ge=16)
    tf_max_iterations: int = Field(default=10_000, ge=1)
    tf_tol: float = Field(default=1e-8, gt=0)

    model_config = SettingsConfigDict(
        env_prefix="IONLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


def read_config_file(path: str) -> Dict[str, str]:
    """Parse a flat ``key = value`` config file into a dict of strings."""
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    values = dotenv_values(config_path)
    return {key.strip().lower().replace("-", "_"): value for key, value in values.items() if value is not None}


def resolve_settings(overrides: Optional[Mapping[str, Any]] = None, config_file: Optional[str] = None) -> Settings:
    """
    Build settings with precedence defaults < environment < config file < overrides.

    Args:
        overrides: Values taken from command-line flags (None entries are ignored)
        config_file: Optional path to a flat key = value file

    Returns:
        Validated Settings instance
    """
    merged: Dict[str, Any] = {}
    if config_file:
        file_values = read_config_file(config_file)
        unknown = sorted(set(file_values) - set(Settings.model_fields))
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
        merged.update(file_values)
    if overrides:
        merged.update({key: value for key, value in overrides.items() if value is not None})

    try:
        return Settings(**merged)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        raise ConfigurationError(f"Invalid configuration: {e}") from e

