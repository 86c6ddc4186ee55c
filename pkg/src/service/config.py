"""
Configuration settings for the Robin spectral lab.
"""

import logging
from functools import lru_cache

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

APP_VERSION = "0.1.0"


class Settings(BaseSettings):
    """
    Process settings, read from ROBINLAB_* environment variables or a .env file.
    """

    model_config = SettingsConfigDict(
        env_prefix="ROBINLAB_", env_file=".env", extra="ignore"
    )

    app_name: str = "Robin spectral lab"
    app_description: str = (
        "Spectra of the semiclassical Robin Laplacian on planar domains"
    )
    app_version: str = APP_VERSION
    log_level: str = Field(
        default="INFO",
        validation_alias=AliasChoices("ROBINLAB_LOG_LEVEL", "LOG_LEVEL"),
        description="Logging level",
    )
    workers: int = Field(
        default=1, ge=1, description="Number of worker processes for grid points"
    )
    output_root: str = Field(
        default="results", description="Directory under which runs write artifacts"
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get the process settings.

    Uses lru_cache to avoid reading the environment on every call.
    """
    return Settings()


def configure_logging():
    """Configure logging for the application."""
    settings = get_settings()
    if settings.log_level.upper() not in logging.getLevelNamesMapping():
        logging.warning(
            "Unrecognized log level '%s'. Falling back to 'INFO'.",
            settings.log_level,
        )
    log_level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
