"""
Seeded synthetic regression data and named presets.

Features are i.i.d. Gaussian with identity covariance (times
``feature_scale``); responses are drawn through the model's link:
Gaussian noise for mean/linear, Bernoulli for logistic, Poisson for
poisson. The true parameter, the training data and any test split come
from independent child streams of one SeedSequence, so a seed fixes all
three and the test split shares the training data's true parameter.
"""

from __future__ import annotations

import logging
from typing import Any, Literal

import numpy as np
from pydantic import Field, model_validator
from scipy.special import expit

from ijkit.errors import InputError
from ijkit.utils import make_rng
from ijkit.utils.config import BaseConfig

from .dataset import Dataset

logger = logging.getLogger(__name__)

# Largest Poisson linear predictor accepted when generating (rate e^30).
MAX_POISSON_ETA = 30.0

_THETA_STREAM, _TRAIN_STREAM, _TEST_STREAM = 0, 1, 2


class SyntheticSpec(BaseConfig):
    """Recipe for a synthetic dataset."""

    kind: Literal["mean", "linear", "logistic", "poisson"] = Field(
        default="logistic",
        description="Model family generating the responses",
    )

    n: int = Field(default=500, ge=1, description="Number of data points")

    p: int = Field(default=5, ge=1, description="Feature dimension")

    seed: int = Field(default=0, ge=0, description="Random seed")

    true_theta: list[float] | None = Field(
        default=None,
        alias="true-theta",
        description="True coefficients (null draws N(0, 1/p) per entry)",
    )

    true_bias: float = Field(
        default=0.0, alias="true-bias", description="True intercept"
    )

    feature_scale: float = Field(
        default=1.0,
        gt=0,
        alias="feature-scale",
        description="Standard deviation of each feature",
    )

    noise_scale: float = Field(
        default=1.0,
        ge=0,
        alias="noise-scale",
        description="Response noise standard deviation (mean/linear only)",
    )

    has_bias: bool = Field(
        default=True,
        alias="has-bias",
        description="Fit an intercept",
    )

    @model_validator(mode="after")
    def check_theta_length(self):
        if self.true_theta is not None and len(self.true_theta) != self.p:
            raise ValueError(
                f"true_theta has {len(self.true_theta)} entries, p={self.p}"
            )
        return self

    def _streams(self) -> list[np.random.SeedSequence]:
        return np.random.SeedSequence(self.seed).spawn(3)

    def resolved_theta(self) -> np.ndarray:
        """The true coefficient vector, drawn from the seed when unset."""
        if self.true_theta is not None:
            return np.array(self.true_theta, dtype=np.float64)
        rng = make_rng(self._streams()[_THETA_STREAM])
        return rng.normal(0.0, 1.0 / np.sqrt(self.p), size=self.p)


def _draw(
    spec: SyntheticSpec, n: int, rng: np.random.Generator
) -> Dataset:
    theta = spec.resolved_theta()
    features = spec.feature_scale * rng.standard_normal((n, spec.p))
    eta = features @ theta + spec.true_bias

    match spec.kind:
        case "mean" | "linear":
            response = eta + spec.noise_scale * rng.standard_normal(n)
        case "logistic":
            response = (rng.random(n) < expit(eta)).astype(np.float64)
        case "poisson":
            if np.max(eta) > MAX_POISSON_ETA:
                raise InputError(
                    f"Poisson linear predictor reaches {np.max(eta):.1f}, "
                    f"above the cap {MAX_POISSON_ETA}; shrink true_theta "
                    "or feature_scale"
                )
            response = rng.poisson(np.exp(eta)).astype(np.float64)
        case _:
            raise InputError(f"Unknown model kind: {spec.kind}")

    return Dataset(features=features, response=response, has_bias=spec.has_bias)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """
    Generate the training dataset described by spec.

    The same spec always yields byte-identical arrays.

    Raises:
        InputError: If a Poisson linear predictor exceeds MAX_POISSON_ETA.
    """
    dataset = _draw(spec, spec.n, make_rng(spec._streams()[_TRAIN_STREAM]))
    logger.debug(
        "Generated %s dataset N=%d P=%d seed=%d",
        spec.kind,
        spec.n,
        spec.p,
        spec.seed,
    )
    return dataset


def generate_test_split(spec: SyntheticSpec, size: int) -> Dataset:
    """Fresh draw of ``size`` points from the same generating model."""
    if size < 1:
        raise InputError(f"Test split size must be >= 1, got {size}")
    return _draw(spec, size, make_rng(spec._streams()[_TEST_STREAM]))


PRESETS: dict[str, dict[str, Any]] = {
    "desk-logistic": {"kind": "logistic", "n": 500, "p": 5},
    "desk-poisson": {
        "kind": "poisson",
        "n": 500,
        "p": 5,
        "feature_scale": 0.5,
    },
    "desk-linear": {"kind": "linear", "n": 200, "p": 10},
    "wide-logistic": {"kind": "logistic", "n": 2000, "p": 100},
    "wide-poisson": {
        "kind": "poisson",
        "n": 2000,
        "p": 100,
        "feature_scale": 0.5,
    },
}


def make_preset(name: str, seed: int = 0, **overrides: Any) -> SyntheticSpec:
    """
    SyntheticSpec for a named preset.

    Args:
        name: Preset name (see list_presets()).
        seed: Random seed.
        **overrides: Field values replacing the preset's.

    Raises:
        InputError: Unknown preset name.
    """
    if name not in PRESETS:
        raise InputError(
            f"Unknown preset '{name}'. Available: {', '.join(list_presets())}"
        )
    return SyntheticSpec.model_validate(
        {**PRESETS[name], "seed": seed, **overrides}
    )


def list_presets() -> list[str]:
    """Sorted preset names."""
    return sorted(PRESETS)
