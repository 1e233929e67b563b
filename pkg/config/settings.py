"""Application settings and configuration."""

from pathlib import Path
from typing import Optional, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "burgers-reductions"
    VERSION: str = "0.1.0"
    LOG_LEVEL: str = Field(default="WARNING")
    LOG_FORMAT: str = Field(default="standard")
    LOG_FILE: Optional[Path] = Field(default=None)

    # Tolerances
    DEFAULT_TOLERANCE: float = Field(default=1e-8)
    HEAT_TOLERANCE: float = Field(default=1e-10)
    DETERMINING_TOLERANCE: float = Field(default=1e-9)
    CERTIFICATE_THRESHOLD: float = Field(default=1e-6)
    FD_RELATIVE_TOLERANCE: float = Field(default=1e-6)
    FD_STEP: float = Field(default=1e-4)
    # Distance to the nearest pole along the differentiated variable, in steps
    FD_CLEARANCE: float = Field(default=2000.0)

    # Grids
    EXCLUSION_THRESHOLD: float = Field(default=1e-6)
    EXCLUSION_BUDGET: float = Field(default=0.2)
    T_RANGE: Tuple[float, float] = Field(default=(0.1, 1.0))
    T_COUNT: int = Field(default=31)
    X_RANGE: Tuple[float, float] = Field(default=(-2.0, 2.0))
    X_COUNT: int = Field(default=41)
    BACKWARD_T_RANGE: Tuple[float, float] = Field(default=(-2.0, -0.1))
    U_RANGE: Tuple[float, float] = Field(default=(-3.0, 3.0))
    U_COUNT: int = Field(default=21)

    # Engine
    DIFF_CACHE_SIZE: int = Field(default=8192)
    SIMPLIFY_CACHE_SIZE: int = Field(default=16384)
    HEAT_CATALOG_BOUND: int = Field(default=12)
    DEFAULT_SEED: int = Field(default=20130611)

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {v}")
        return v.upper()

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate log format."""
        if v.lower() not in ("standard", "json"):
            raise ValueError(f"Invalid log format: {v}")
        return v.lower()

    @field_validator(
        "DEFAULT_TOLERANCE",
        "HEAT_TOLERANCE",
        "DETERMINING_TOLERANCE",
        "CERTIFICATE_THRESHOLD",
        "FD_RELATIVE_TOLERANCE",
        "FD_STEP",
        "FD_CLEARANCE",
        "EXCLUSION_THRESHOLD",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances and steps must be positive."""
        if not v > 0:
            raise ValueError(f"Expected a positive value, got {v}")
        return v

    @field_validator("EXCLUSION_BUDGET")
    @classmethod
    def validate_budget(cls, v: float) -> float:
        """Exclusion budget is a fraction in (0, 1)."""
        if not 0 < v < 1:
            raise ValueError(f"Exclusion budget must lie in (0, 1), got {v}")
        return v


# Create settings instance
settings = Settings()
