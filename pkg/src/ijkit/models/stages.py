"""
Second-stage GLMs for two-stage estimators.

The second stage's linear predictor carries an offset u_nᵀc, where c is the
context produced from the first-stage parameter by a Coupling:

    η_n = θ₂ᵀz_n + u_nᵀc,    g_n = (μ(η_n) − y_n) z_n
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from ijkit.core import (
    CoupledStage,
    IdentityCoupling,
    Parameter,
    StackedEquation,
    stack_equations,
)
from ijkit.errors import InputError

from .dataset import Dataset
from .glm import (
    GlmModel,
    ModelKind,
    check_index,
    inverse_link,
    validate_response,
)

Array = npt.NDArray[np.float64]


class OffsetGlmStage(CoupledStage):
    """GLM whose linear predictor is shifted by u_nᵀc."""

    def __init__(
        self,
        kind: str | ModelKind,
        dataset: Dataset,
        offset_features: npt.ArrayLike,
    ) -> None:
        self.kind = ModelKind(kind)
        if self.kind is ModelKind.MEAN:
            raise InputError("Use kind 'linear' with an intercept for a mean")
        validate_response(self.kind, dataset.response)
        offsets = np.array(offset_features, dtype=np.float64)
        if offsets.ndim == 1:
            offsets = offsets.reshape(-1, 1)
        if offsets.shape[0] != dataset.n_points:
            raise InputError(
                f"Offset features have {offsets.shape[0]} rows, dataset has "
                f"{dataset.n_points}"
            )
        self.design = dataset.design()
        self.response = dataset.response
        self.offset_features = offsets
        if self.design.shape[1] == 0:
            raise InputError("Second stage needs at least one parameter")

    @property
    def n_points(self) -> int:
        return int(self.design.shape[0])

    @property
    def dim(self) -> int:
        return int(self.design.shape[1])

    @property
    def context_dim(self) -> int:
        return int(self.offset_features.shape[1])

    def _link(self, theta: Parameter, context: Array) -> tuple[Array, Array]:
        eta = self.design @ theta + self.offset_features @ context
        return inverse_link(self.kind, eta)

    def eval_g(self, index: int, theta: Parameter, context: Array) -> Array:
        return self.g_all(theta, context)[check_index(index, self.n_points)]

    def eval_h(self, index: int, theta: Parameter, context: Array) -> Array:
        return self.h_all(theta, context)[check_index(index, self.n_points)]

    def eval_h_context(
        self, index: int, theta: Parameter, context: Array
    ) -> Array:
        index = check_index(index, self.n_points)
        return self.h_context_all(theta, context)[index]

    def g_all(self, theta: Parameter, context: Array) -> Array:
        mu, _ = self._link(theta, context)
        return (mu - self.response)[:, None] * self.design

    def h_all(self, theta: Parameter, context: Array) -> Array:
        _, dmu = self._link(theta, context)
        z = self.design
        return dmu[:, None, None] * z[:, :, None] * z[:, None, :]

    def h_context_all(self, theta: Parameter, context: Array) -> Array:
        _, dmu = self._link(theta, context)
        z, u = self.design, self.offset_features
        return dmu[:, None, None] * z[:, :, None] * u[:, None, :]


def two_stage_mean(
    x: npt.ArrayLike, y: npt.ArrayLike
) -> StackedEquation:
    """
    θ₁ = mean(x), θ₂ = mean(y − θ₁), as one stacked estimating equation.

    Args:
        x: First-stage observations.
        y: Second-stage observations, same length.

    Returns:
        Equation over (θ₁, θ₂) with root (x̄, ȳ − x̄).
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise InputError("x and y must have the same length")
    empty = np.zeros((x.shape[0], 0))
    first = GlmModel("mean", Dataset(features=empty, response=x))
    second = OffsetGlmStage(
        "linear",
        Dataset(features=empty, response=y, has_bias=True),
        np.ones((x.shape[0], 1)),
    )
    return stack_equations(first, second, IdentityCoupling(1))


def plug_in_two_stage(
    first: GlmModel, second_kind: str | ModelKind, second_data: Dataset
) -> StackedEquation:
    """
    Second stage offset by the first stage's fitted linear predictor.

    The offset for datum n is θ₁ᵀx_n, with x_n the first-stage design row.
    """
    stage = OffsetGlmStage(second_kind, second_data, first.design)
    return stack_equations(first, stage, IdentityCoupling(first.dim))
