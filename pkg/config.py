"""
Configuration settings for cmvkit.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Config:
    """Numerical and runtime configuration."""

    # Tolerances
    RANK_TOL = float(os.getenv("CMVKIT_TOL", "1e-9"))
    RESIDUAL_TOL = float(os.getenv("CMVKIT_RESIDUAL_TOL", "1e-10"))
    CONTRACTION_TOL = float(os.getenv("CMVKIT_CONTRACTION_TOL", "1e-10"))
    TERMINATION_TOL = float(os.getenv("CMVKIT_TERMINATION_TOL", "1e-8"))

    # Runtime
    LOG_LEVEL = os.getenv("CMVKIT_LOG_LEVEL", "WARNING")
    MAX_WORKERS = int(os.getenv("CMVKIT_WORKERS", "4"))

    @classmethod
    def validate(cls):
        """Validate tolerances and runtime settings."""
        for name in ("RANK_TOL", "RESIDUAL_TOL", "CONTRACTION_TOL", "TERMINATION_TOL"):
            value = getattr(cls, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

        if cls.MAX_WORKERS < 1:
            raise ValueError(f"MAX_WORKERS must be at least 1, got {cls.MAX_WORKERS}")

        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if cls.LOG_LEVEL.upper() not in valid_levels:
            print(f"Warning: Log level '{cls.LOG_LEVEL}' is not recognised. Using 'WARNING' instead.")
            cls.LOG_LEVEL = "WARNING"

    @classmethod
    def override(cls, **values):
        """Replace configuration values at runtime (used by the CLI flags)."""
        for key, value in values.items():
            if value is None:
                continue
            if not hasattr(cls, key):
                raise AttributeError(f"Unknown configuration key: {key}")
            setattr(cls, key, value)
        cls.validate()
