# app/core/config.py
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Application settings
    APP_NAME: str = "Channel FSI Lab"
    APP_DESCRIPTION: str = "Fixed-point solver and inequality lab for the channel fluid-wave system"
    ENVIRONMENT: str = "development"
    DEBUG: bool = ENVIRONMENT == "development"

    # Worker threads for FFTs and job fan-out
    FSI_THREADS: int = 1

    # Logging
    LOG_FILE: str = "fsi_runs.log"
    LOG_LEVEL: str = "INFO"

    # Default root for run artifacts when a config does not name one
    OUTPUT_ROOT: str = "runs"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()
