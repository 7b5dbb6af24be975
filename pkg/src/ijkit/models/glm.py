"""
Generalised linear models as estimating equations.

Each model minimises a per-datum loss f(x_n, θ) that depends on θ only
through the linear predictor η_n = θᵀx_n, so

    g_n(θ) = (μ(η_n) − y_n) x_n,    h_n(θ) = μ'(η_n) x_n x_nᵀ

where μ is the inverse link. The ``mean`` kind is the intercept-only
linear model: its design is a single column of ones and θ̂ is the
(weighted) mean of the response.
"""

from __future__ import annotations

import logging
from enum import Enum

import numpy as np
import numpy.typing as npt
from scipy.special import expit, gammaln

from ijkit.core import EstimatingEquation, Parameter, as_parameter
from ijkit.errors import InputError

from .dataset import Dataset

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]


class ModelKind(Enum):
    MEAN = "mean"
    LINEAR = "linear"
    LOGISTIC = "logistic"
    POISSON = "poisson"


def inverse_link(kind: ModelKind, eta: Array) -> tuple[Array, Array]:
    """Return (μ(η), μ'(η)) for the model kind."""
    match kind:
        case ModelKind.MEAN | ModelKind.LINEAR:
            return eta, np.ones_like(eta)
        case ModelKind.LOGISTIC:
            p = expit(eta)
            return p, p * (1.0 - p)
        case ModelKind.POISSON:
            with np.errstate(over="ignore"):
                rate = np.exp(eta)
            return rate, rate
    raise InputError(f"Unknown model kind: {kind}")


def per_datum_loss(kind: ModelKind, eta: Array, y: Array) -> Array:
    """Squared error or negative log-likelihood at each datum."""
    match kind:
        case ModelKind.MEAN | ModelKind.LINEAR:
            return 0.5 * (eta - y) ** 2
        case ModelKind.LOGISTIC:
            return np.logaddexp(0.0, eta) - y * eta
        case ModelKind.POISSON:
            with np.errstate(over="ignore"):
                return np.exp(eta) - y * eta + gammaln(y + 1.0)
    raise InputError(f"Unknown model kind: {kind}")


def validate_response(kind: ModelKind, response: Array) -> None:
    """
    Check that responses are in the model's support.

    Raises:
        InputError: Logistic responses outside {0, 1}, Poisson responses
            that are negative or non-integer.
    """
    if kind is ModelKind.LOGISTIC:
        if not np.all((response == 0.0) | (response == 1.0)):
            raise InputError("Logistic responses must be 0 or 1")
    elif kind is ModelKind.POISSON:
        if np.any(response < 0.0) or np.any(response != np.round(response)):
            raise InputError("Poisson responses must be nonnegative integers")


def check_index(index: int, n: int) -> int:
    """index itself when 0 <= index < n; negative indices do not wrap."""
    if not 0 <= index < n:
        raise InputError(f"Datum index {index} outside [0, {n})")
    return index


class GlmModel(EstimatingEquation):
    """
    Mean, linear, logistic or Poisson regression on a Dataset.

    Example:
        data = Dataset(features=[[1.0], [2.0]], response=[0, 1])
        model = GlmModel("logistic", data)
        model.g_all(np.zeros(model.dim))
    """

    def __init__(self, kind: str | ModelKind, dataset: Dataset) -> None:
        try:
            self.kind = ModelKind(kind)
        except ValueError as e:
            choices = ", ".join(k.value for k in ModelKind)
            raise InputError(
                f"Unknown model kind '{kind}'. Choose from: {choices}"
            ) from e
        validate_response(self.kind, dataset.response)

        self.dataset = dataset
        if self.kind is ModelKind.MEAN:
            self.design = np.ones((dataset.n_points, 1))
        else:
            self.design = dataset.design()
        self.design.flags.writeable = False
        self.response = dataset.response

    @property
    def n_points(self) -> int:
        return int(self.design.shape[0])

    @property
    def dim(self) -> int:
        return int(self.design.shape[1])

    def linear_predictor(self, theta: Parameter) -> Array:
        return self.design @ theta

    def eval_g(self, index: int, theta: Parameter) -> Array:
        x = self.design[check_index(index, self.n_points)]
        mu, _ = inverse_link(self.kind, np.atleast_1d(x @ theta))
        return (mu[0] - self.response[index]) * x

    def eval_h(self, index: int, theta: Parameter) -> Array:
        x = self.design[check_index(index, self.n_points)]
        _, dmu = inverse_link(self.kind, np.atleast_1d(x @ theta))
        return dmu[0] * np.outer(x, x)

    def g_all(self, theta: Parameter) -> Array:
        mu, _ = inverse_link(self.kind, self.linear_predictor(theta))
        return (mu - self.response)[:, None] * self.design

    def h_all(self, theta: Parameter) -> Array:
        _, dmu = inverse_link(self.kind, self.linear_predictor(theta))
        x = self.design
        return dmu[:, None, None] * x[:, :, None] * x[:, None, :]

    def h_vector_products(self, theta: Parameter, v: Array) -> Array:
        _, dmu = inverse_link(self.kind, self.linear_predictor(theta))
        return (dmu * (self.design @ v))[:, None] * self.design

    def loss_all(
        self, theta: Parameter, indices: npt.ArrayLike | None = None
    ) -> Array:
        """Per-datum losses f(x_n, θ), optionally restricted to indices."""
        if indices is None:
            x, y = self.design, self.response
        else:
            idx = np.asarray(indices, dtype=np.int64)
            x, y = self.design[idx], self.response[idx]
        return per_datum_loss(self.kind, x @ theta, y)

    def predict(self, theta: Parameter, features: npt.ArrayLike) -> Array:
        """Mean response μ(θᵀx) for new feature rows."""
        rows = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if self.kind is ModelKind.MEAN:
            rows = np.ones((rows.shape[0], 1))
        elif self.dataset.has_bias:
            rows = np.hstack([rows, np.ones((rows.shape[0], 1))])
        mu, _ = inverse_link(self.kind, rows @ theta)
        return mu

    def __repr__(self) -> str:
        return (
            f"GlmModel(kind={self.kind.value!r}, N={self.n_points}, "
            f"D={self.dim})"
        )


def make_model(kind: str | ModelKind, dataset: Dataset) -> GlmModel:
    """
    Build the estimating equation for a model kind.

    Args:
        kind: One of mean, linear, logistic, poisson.
        dataset: Data the model is fitted on.

    Returns:
        The model, usable anywhere an EstimatingEquation is expected.

    Raises:
        InputError: Unknown kind or responses outside the model's support.
    """
    model = GlmModel(kind, dataset)
    logger.debug("Built %r", model)
    return model


def held_out_loss(
    model: GlmModel, theta: Parameter, indices: npt.ArrayLike
) -> float:
    """
    Mean per-datum loss over a set of data indices.

    Duplicate indices count once and order does not matter.

    Raises:
        InputError: Empty index set or indices outside [0, N).
    """
    idx = np.unique(np.asarray(indices, dtype=np.int64).reshape(-1))
    if idx.size == 0:
        raise InputError("held_out_loss needs at least one index")
    if idx[0] < 0 or idx[-1] >= model.n_points:
        raise InputError(f"Index out of range for N={model.n_points}")
    theta = as_parameter(theta, model.dim)
    return float(np.mean(model.loss_all(theta, idx)))
