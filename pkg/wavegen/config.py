"""Configuration management for wavegen."""

import logging
import math
import os
from pathlib import Path
from typing import Callable, TypeVar

from dotenv import load_dotenv

_T = TypeVar("_T", int, float)


class Config:
    """Default run parameters loaded from environment variables and .env files.

    Every value has a default, so no configuration is required; command-line
    flags always take precedence over what is stored here.

    Attributes:
        epsilon: Solver stop threshold on the total absolute residual. Loaded
            from WAVEGEN_EPSILON, defaults to 1e-13.
        max_sweeps: Solver sweep cap. Loaded from WAVEGEN_MAX_SWEEPS, defaults
            to 20000.
        seed: Default random seed. Loaded from WAVEGEN_SEED, defaults to 0.
        tolerance: Pass threshold used by verify and reconstruct. Loaded from
            WAVEGEN_TOLERANCE, defaults to 1e-10.
        log_level: Logging level name. Loaded from WAVEGEN_LOG_LEVEL, defaults
            to "WARNING".
        workers: Processes used by multi-start solves. Loaded from
            WAVEGEN_WORKERS, defaults to 1.
    """

    def __init__(self) -> None:
        """Initialize configuration by loading environment variables.

        Checks for a .env file in this order and loads the first one found:
        1. Current working directory (.env)
        2. Home directory (~/.env)
        3. Project directory (where the wavegen package is located)

        Environment variables already set in the shell take precedence over
        .env file values.

        A value that cannot be parsed falls back to its default and the error
        is reported by validate().
        """
        env_paths = [
            Path.cwd() / ".env",
            Path.home() / ".env",
            Path(__file__).parent.parent / ".env",
        ]

        for env_path in env_paths:
            if env_path.exists():
                load_dotenv(env_path)
                break

        self._parse_errors: list[str] = []
        self.epsilon: float = self._parse("WAVEGEN_EPSILON", "1e-13", float)
        self.max_sweeps: int = self._parse("WAVEGEN_MAX_SWEEPS", "20000", int)
        self.seed: int = self._parse("WAVEGEN_SEED", "0", int)
        self.tolerance: float = self._parse("WAVEGEN_TOLERANCE", "1e-10", float)
        self.log_level: str = os.getenv("WAVEGEN_LOG_LEVEL", "WARNING").upper()
        self.workers: int = self._parse("WAVEGEN_WORKERS", "1", int)

    def _parse(self, key: str, default: str, kind: Callable[[str], _T]) -> _T:
        raw = os.getenv(key, default)
        try:
            return kind(raw)
        except ValueError:
            expected = "an integer" if kind is int else "a number"
            self._parse_errors.append(f"{key} must be {expected}, got {raw!r}")
            return kind(default)

    def validate(self) -> None:
        """Validate the loaded values.

        Raises:
            ValueError: If a value could not be parsed or is out of range:
                non-positive thresholds, counts below one, seeds outside 64
                unsigned bits, unknown log levels. The message names the key.
        """
        if self._parse_errors:
            raise ValueError(self._parse_errors[0])
        for key, value in (
            ("WAVEGEN_EPSILON", self.epsilon),
            ("WAVEGEN_TOLERANCE", self.tolerance),
        ):
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{key} must be a finite positive number, got {value}")
        if self.max_sweeps < 1:
            raise ValueError(f"WAVEGEN_MAX_SWEEPS must be at least 1, got {self.max_sweeps}")
        if self.workers < 1:
            raise ValueError(f"WAVEGEN_WORKERS must be at least 1, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"WAVEGEN_SEED must fit in 64 unsigned bits, got {self.seed}")
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ValueError(f"WAVEGEN_LOG_LEVEL is not a logging level: {self.log_level}")


# Global configuration instance
config = Config()
