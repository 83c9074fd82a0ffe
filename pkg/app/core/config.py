# app/core/config.py
import logging
import math

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = {
    "CRITICAL": logging.CRITICAL,
    "ERROR": logging.ERROR,
    "WARNING": logging.WARNING,
    "INFO": logging.INFO,
    "DEBUG": logging.DEBUG,
}


class Settings(BaseSettings):
    # Pydantic model configuration
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding='utf-8',
        case_sensitive=False,
        extra="ignore"
    )

    # Logging is the only process-level setting taken from the environment
    log_level: str = Field("INFO", validation_alias="DMN_LOG_LEVEL")

    @field_validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"Unknown log level '{v}'")
        return level

    @property
    def log_level_value(self) -> int:
        return LOG_LEVELS[self.log_level]


class SolverSettings(BaseModel):
    """Numerical controls of the implicit failure solver."""

    newton_tolerance: float = Field(1e-6, gt=0)
    max_iterations: int = Field(40, gt=0)
    max_refinements: int = Field(10, ge=0)
    max_cracks_per_cell: int = Field(4, ge=0)
    crack_cosine_limit: float = Field(math.sqrt(2.0) / 2.0, gt=0, le=1)
    twin_perturbation: float = Field(1e-6, ge=0)
    penalty_stiffness: float = Field(1e8, gt=0)
    floor_stiffness: float = Field(1e-4, ge=0)

    @model_validator(mode='after')
    def check_twin_perturbation(self) -> 'SolverSettings':
        if self.twin_perturbation >= 0.5:
            raise ValueError('twin_perturbation must be a small relative value')
        return self


# Singleton global instance
settings = Settings()

# Helper accessors
def get_log_level() -> int:
    return settings.log_level_value
