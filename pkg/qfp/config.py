"""
Configuration management for the simulator and its experiments.
"""
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from QFP_* environment variables or a .env file."""

    # Simulation
    prune_threshold: float = 1e-14
    dense_max_qubits: int = 26
    default_backend: str = "semantic"

    # Experiments
    seed: int = 20250917
    newton_iterations: int = 10
    horner_order: int = 12
    output_dir: str = "results"

    # Execution
    workers: int = 1

    # Logging
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="QFP_",
        case_sensitive=False
    )


def parse_int_list(raw: str) -> List[int]:
    """Parse a comma-separated list of integers ("10,12,14")."""
    return [int(part.strip()) for part in raw.split(",") if part.strip()]


def parse_float_list(raw: str) -> List[float]:
    """Parse a comma-separated list of floats; accepts 2^-3 style powers."""
    values = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if part.startswith("2^"):
            values.append(2.0 ** int(part[2:]))
        else:
            values.append(float(part))
    return values


# Global settings instance
settings = Settings()
