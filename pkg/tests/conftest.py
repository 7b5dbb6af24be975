"""
Shared fixtures for the ijkit test suite.
"""

import logging

import numpy as np
import pytest

from ijkit.core import WeightVector
from ijkit.models import (
    Dataset,
    GlmModel,
    SyntheticSpec,
    generate_synthetic,
    make_model,
)
from ijkit.solver import FitResult, solve

MEAN_DATA = [1.0, 2.0, 3.0, 6.0]


@pytest.fixture(autouse=True)
def reset_ijkit_logger():
    """CLI tests attach handlers to streams that are closed afterwards."""
    yield
    logger = logging.getLogger("ijkit")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)


def fit_at_ones(model: GlmModel) -> FitResult:
    """Converged fit at unit weights, starting from zero."""
    base = solve(model, WeightVector.ones(model.n_points), np.zeros(model.dim))
    assert base.converged, base.message
    return base


def synthetic_model(kind: str, n: int, p: int, seed: int = 0) -> GlmModel:
    spec = SyntheticSpec(kind=kind, n=n, p=p, seed=seed)
    return make_model(kind, generate_synthetic(spec))


@pytest.fixture
def mean_model() -> GlmModel:
    """Intercept-only model on x = [1, 2, 3, 6]; θ̂ = 3."""
    return make_model(
        "mean", Dataset(features=np.zeros((4, 0)), response=MEAN_DATA)
    )


@pytest.fixture
def logistic_model() -> GlmModel:
    return synthetic_model("logistic", n=200, p=3, seed=1)


@pytest.fixture
def poisson_model() -> GlmModel:
    spec = SyntheticSpec(kind="poisson", n=200, p=3, seed=2, feature_scale=0.5)
    return make_model("poisson", generate_synthetic(spec))


@pytest.fixture
def linear_model() -> GlmModel:
    return synthetic_model("linear", n=60, p=4, seed=3)


@pytest.fixture
def fit_ones():
    """Factory fixture: fit a model at unit weights."""
    return fit_at_ones


@pytest.fixture
def make_synthetic():
    """Factory fixture: ``(kind, n, p, seed) -> GlmModel``."""
    return synthetic_model
