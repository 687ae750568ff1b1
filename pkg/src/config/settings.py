import os
from typing import Optional, Dict, Any, List
from pydantic import BaseModel, Field
from enum import Enum
from dotenv import load_dotenv

# Carregar variáveis do arquivo .env
load_dotenv()


class Environment(str, Enum):
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class LogLevel(str, Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class ChaosSettings(BaseModel):
    # Environment
    environment: Environment = Field(
        default=Environment.DEVELOPMENT,
        description="Environment the system is running in"
    )

    # Logging Configuration
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")
    log_file_path: Optional[str] = Field(None, description="Path to log file")
    show_progress: bool = Field(default=True, description="Show tqdm progress bars for long loops")

    # Processing Configuration
    max_workers: int = Field(default=1, description="Worker threads for parallel maps")
    mc_chunk_size: int = Field(default=64, description="Monte Carlo paths per work unit")
    out_dir: str = Field(default="results", description="Default output directory")

    # Verification Configuration
    energy_tolerance: float = Field(default=1e-6, description="Allowed |residual| of the energy ledger")
    oracle_cost_budget: float = Field(
        default=2e7,
        description="Maximum integrand evaluations the iterated-integral oracle may spend"
    )
    csv_digits: int = Field(default=17, description="Significant digits in CSV output")

    # System Configuration
    system_version: str = Field(default="1.0.0", description="chaos-transport version")

    @classmethod
    def from_env(cls) -> "ChaosSettings":
        # Helper function to clean environment values
        def clean_env(key: str, default: str = "") -> str:
            value = os.getenv(key, default)
            return value.split('#')[0].strip() if value else default

        return cls(
            environment=Environment(clean_env("CHAOS_ENVIRONMENT", "development")),

            # Logging
            log_level=LogLevel(clean_env("CHAOS_LOG_LEVEL", "INFO").upper()),
            log_file_path=clean_env("CHAOS_LOG_FILE_PATH") or None,
            show_progress=clean_env("CHAOS_SHOW_PROGRESS", "true").lower() == "true",

            # Processing
            max_workers=int(clean_env("CHAOS_MAX_WORKERS", "1")),
            mc_chunk_size=int(clean_env("CHAOS_MC_CHUNK_SIZE", "64")),
            out_dir=clean_env("CHAOS_OUT_DIR", "results"),

            # Verification
            energy_tolerance=float(clean_env("CHAOS_ENERGY_TOLERANCE", "1e-6")),
            oracle_cost_budget=float(clean_env("CHAOS_ORACLE_COST_BUDGET", "2e7")),
            csv_digits=int(clean_env("CHAOS_CSV_DIGITS", "17")),

            # System
            system_version=clean_env("CHAOS_SYSTEM_VERSION", "1.0.0"),
        )

    def validate_settings(self) -> List[str]:
        errors = []

        if self.max_workers < 1:
            errors.append("CHAOS_MAX_WORKERS must be at least 1")

        if self.mc_chunk_size < 1:
            errors.append("CHAOS_MC_CHUNK_SIZE must be at least 1")

        if not (0.0 < self.energy_tolerance < 1.0):
            errors.append("CHAOS_ENERGY_TOLERANCE must be between 0.0 and 1.0")

        if self.oracle_cost_budget <= 0:
            errors.append("CHAOS_ORACLE_COST_BUDGET must be positive")

        if not (6 <= self.csv_digits <= 17):
            errors.append("CHAOS_CSV_DIGITS must be between 6 and 17")

        return errors

    def get_summary(self) -> Dict[str, Any]:
        return {
            "environment": self.environment.value,
            "system_version": self.system_version,
            "max_workers": self.max_workers,
            "mc_chunk_size": self.mc_chunk_size,
            "energy_tolerance": self.energy_tolerance,
            "oracle_cost_budget": self.oracle_cost_budget,
            "csv_digits": self.csv_digits,
        }


# Global settings instance
_settings: Optional[ChaosSettings] = None


def get_settings() -> ChaosSettings:
    global _settings
    if _settings is None:
        _settings = ChaosSettings.from_env()
    return _settings


def reload_settings() -> ChaosSettings:
    global _settings
    _settings = ChaosSettings.from_env()
    return _settings
