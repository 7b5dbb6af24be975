"""
Configuration of the weight family an experiment runs over.
"""

import logging
from pathlib import Path
from typing import Literal

from pydantic import Field

from ijkit.core import WeightVector
from ijkit.errors import InputError
from ijkit.ij import GradientCache
from ijkit.utils.config import BaseConfig

from .families import adversarial, bootstrap, leave_k_out, load_weights_csv

logger = logging.getLogger(__name__)


class WeightFamily(BaseConfig):
    """
    Which weight vectors to evaluate.

    The family's seed is the experiment seed, so it is not repeated here.
    """

    family: Literal["leave_k_out", "bootstrap", "custom", "adversarial"] = (
        Field(
            default="leave_k_out",
            description="Weight family",
        )
    )

    k: int = Field(
        default=1,
        ge=1,
        description="Points left out per vector (leave_k_out)",
    )

    bootstrap: int = Field(
        default=100,
        ge=1,
        description="Number of bootstrap resamples B (bootstrap)",
    )

    limit: int | None = Field(
        default=None,
        ge=1,
        description="Sample this many leave-k-out vectors (null: all)",
    )

    weights_path: Path | None = Field(
        default=None,
        alias="weights-path",
        description="CSV of weight vectors, one per row (custom)",
    )


def build_family(
    spec: WeightFamily,
    n: int,
    cache: GradientCache | None = None,
    seed: int = 0,
) -> list[WeightVector]:
    """
    Materialise a configured weight family for N data points.

    Args:
        spec: Family configuration.
        n: Number of data points.
        cache: Gradients at the base fit; required for adversarial.
        seed: Seed for sampled families.

    Raises:
        InputError: Missing cache or weights path, or invalid parameters.
    """
    match spec.family:
        case "leave_k_out":
            weights = list(leave_k_out(n, spec.k, spec.limit, seed))
        case "bootstrap":
            weights = bootstrap(n, spec.bootstrap, seed)
        case "custom":
            if spec.weights_path is None:
                raise InputError("The custom family needs weights_path")
            weights = load_weights_csv(spec.weights_path, n)
        case "adversarial":
            if cache is None:
                raise InputError("The adversarial family needs a base fit")
            weights = [adversarial(cache)]
        case _:
            raise InputError(f"Unknown weight family: {spec.family}")

    logger.info("Built %d weight vectors (%s)", len(weights), spec.family)
    return weights
