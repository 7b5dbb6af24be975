"""
Utility functions shared across ijkit.
"""

import logging
import os
from pathlib import Path

import numpy as np

from .config import (
    BaseConfig,
    config_option,
    format_validation_error,
    generate_config_option,
)
from .refit_logger import RefitLogger
from .run_logger import (
    load_config_from_run,
    resolve_output_path,
    save_run_details,
)

THREADS_ENV_VAR = "IJKIT_THREADS"


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """
    Create the random generator used everywhere in ijkit.

    The bit generator is pinned to PCG64 so that a seed maps to the same
    stream across numpy releases; nothing in the package touches global
    random state.

    Args:
        seed: Non-negative integer seed or a spawned SeedSequence.

    Returns:
        Seeded numpy Generator.
    """
    return np.random.Generator(np.random.PCG64(seed))


def default_threads() -> int:
    """Thread count from IJKIT_THREADS, 1 when unset or invalid."""
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def setup_logging(
    log_file: str | None = None, level: str = "INFO"
) -> logging.Logger:
    """
    Set up logging configuration.

    Args:
        log_file: Optional log file path
        level: Logging level

    Returns:
        Configured logger
    """
    logger = logging.getLogger("ijkit")
    logger.setLevel(getattr(logging, level.upper()))

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    # Repeated CLI invocations in one process must not stack handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


__all__ = [
    "BaseConfig",
    "RefitLogger",
    "THREADS_ENV_VAR",
    "config_option",
    "default_threads",
    "format_validation_error",
    "generate_config_option",
    "load_config_from_run",
    "make_rng",
    "resolve_output_path",
    "save_run_details",
    "setup_logging",
]
