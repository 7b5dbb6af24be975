"""
Estimating equations.

An estimating equation is a collection of N per-datum functions
g_n(θ) ∈ R^D together with their Jacobians h_n(θ) = ∂g_n/∂θᵀ. The base
class only requires the per-datum evaluations; models override the
vectorised ``g_all``/``h_all``/``h_vector_products`` for speed.

Two-stage estimators are expressed by stacking a first-stage equation with
a second stage that sees the first-stage parameter only through a
coupling map.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np
import numpy.typing as npt

from ijkit.errors import InputError

from .types import Parameter

Array = npt.NDArray[np.float64]


class EstimatingEquation(ABC):
    """
    Abstract weighted estimating equation (1/N) Σ w_n g_n(θ) = 0.

    Implementations must be pure: identical arguments give identical
    values, so evaluations may run concurrently.
    """

    #: Whether every h_n is symmetric (true for optimisation problems).
    symmetric: bool = True

    @property
    @abstractmethod
    def n_points(self) -> int:
        """Number of data points N."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Parameter dimension D."""

    @abstractmethod
    def eval_g(self, index: int, theta: Parameter) -> Array:
        """g_n(θ), shape (D,)."""

    @abstractmethod
    def eval_h(self, index: int, theta: Parameter) -> Array:
        """h_n(θ) = ∂g_n/∂θᵀ, shape (D, D)."""

    def g_all(self, theta: Parameter) -> Array:
        """All g_n(θ) stacked, shape (N, D)."""
        return np.stack(
            [self.eval_g(n, theta) for n in range(self.n_points)]
        ).reshape(self.n_points, self.dim)

    def h_all(self, theta: Parameter) -> Array:
        """All h_n(θ) stacked, shape (N, D, D)."""
        return np.stack(
            [self.eval_h(n, theta) for n in range(self.n_points)]
        ).reshape(self.n_points, self.dim, self.dim)

    def h_vector_products(self, theta: Parameter, v: Array) -> Array:
        """Rows h_n(θ) v, shape (N, D)."""
        return np.einsum("nij,j->ni", self.h_all(theta), v)

    def ht_vector_products(self, theta: Parameter, v: Array) -> Array:
        """Rows h_n(θ)ᵀ v, shape (N, D)."""
        if self.symmetric:
            return self.h_vector_products(theta, v)
        return np.einsum("nji,j->ni", self.h_all(theta), v)


class Coupling(ABC):
    """Map c(θ₁) from first-stage parameters to second-stage context."""

    @property
    @abstractmethod
    def input_dim(self) -> int: ...

    @property
    @abstractmethod
    def output_dim(self) -> int: ...

    @abstractmethod
    def transform(self, theta: Parameter) -> Array:
        """c(θ₁), shape (C,)."""

    @abstractmethod
    def jacobian(self, theta: Parameter) -> Array:
        """∂c/∂θ₁ᵀ, shape (C, D₁)."""


class IdentityCoupling(Coupling):
    """c(θ₁) = θ₁."""

    def __init__(self, dim: int) -> None:
        self._dim = dim

    @property
    def input_dim(self) -> int:
        return self._dim

    @property
    def output_dim(self) -> int:
        return self._dim

    def transform(self, theta: Parameter) -> Array:
        return np.array(theta, dtype=np.float64)

    def jacobian(self, theta: Parameter) -> Array:
        return np.eye(self._dim)


class CoupledStage(ABC):
    """
    Second-stage estimating functions g_n(θ₂; c) that depend on the first
    stage only through a context vector c.
    """

    symmetric: bool = True

    @property
    @abstractmethod
    def n_points(self) -> int: ...

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    @abstractmethod
    def context_dim(self) -> int: ...

    @abstractmethod
    def eval_g(self, index: int, theta: Parameter, context: Array) -> Array:
        """g_n(θ₂; c), shape (D₂,)."""

    @abstractmethod
    def eval_h(self, index: int, theta: Parameter, context: Array) -> Array:
        """∂g_n/∂θ₂ᵀ, shape (D₂, D₂)."""

    @abstractmethod
    def eval_h_context(
        self, index: int, theta: Parameter, context: Array
    ) -> Array:
        """∂g_n/∂cᵀ, shape (D₂, C)."""

    def g_all(self, theta: Parameter, context: Array) -> Array:
        return np.stack(
            [self.eval_g(n, theta, context) for n in range(self.n_points)]
        ).reshape(self.n_points, self.dim)

    def h_all(self, theta: Parameter, context: Array) -> Array:
        return np.stack(
            [self.eval_h(n, theta, context) for n in range(self.n_points)]
        ).reshape(self.n_points, self.dim, self.dim)

    def h_context_all(self, theta: Parameter, context: Array) -> Array:
        return np.stack(
            [
                self.eval_h_context(n, theta, context)
                for n in range(self.n_points)
            ]
        ).reshape(self.n_points, self.dim, self.context_dim)

    def bind(self, context: npt.ArrayLike) -> BoundStage:
        """Freeze the context, giving an ordinary estimating equation."""
        return BoundStage(self, np.array(context, dtype=np.float64))


class BoundStage(EstimatingEquation):
    """A CoupledStage with its context held fixed."""

    def __init__(self, stage: CoupledStage, context: Array) -> None:
        if context.shape != (stage.context_dim,):
            raise InputError(
                f"Context has shape {context.shape}, stage expects "
                f"({stage.context_dim},)"
            )
        self.stage = stage
        self.context = context
        self.symmetric = stage.symmetric

    @property
    def n_points(self) -> int:
        return self.stage.n_points

    @property
    def dim(self) -> int:
        return self.stage.dim

    def eval_g(self, index: int, theta: Parameter) -> Array:
        return self.stage.eval_g(index, theta, self.context)

    def eval_h(self, index: int, theta: Parameter) -> Array:
        return self.stage.eval_h(index, theta, self.context)

    def g_all(self, theta: Parameter) -> Array:
        return self.stage.g_all(theta, self.context)

    def h_all(self, theta: Parameter) -> Array:
        return self.stage.h_all(theta, self.context)


class StackedEquation(EstimatingEquation):
    """
    Two-stage estimator as one M-estimator over θ = (θ₁, θ₂).

    The first D₁ rows of g_n are the first-stage functions, the remaining
    rows the second stage evaluated at c(θ₁). The Jacobian is block lower
    triangular with cross-block ∂g₂/∂c · ∂c/∂θ₁ᵀ, so it is not symmetric.
    """

    symmetric = False

    def __init__(
        self,
        first: EstimatingEquation,
        second: CoupledStage,
        coupling: Coupling,
    ) -> None:
        self.first = first
        self.second = second
        self.coupling = coupling

    @property
    def n_points(self) -> int:
        return self.first.n_points

    @property
    def dim(self) -> int:
        return self.first.dim + self.second.dim

    def split(self, theta: Parameter) -> tuple[Parameter, Parameter]:
        """Separate (θ₁, θ₂)."""
        d1 = self.first.dim
        return theta[:d1], theta[d1:]

    def eval_g(self, index: int, theta: Parameter) -> Array:
        theta1, theta2 = self.split(theta)
        context = self.coupling.transform(theta1)
        return np.concatenate(
            [
                self.first.eval_g(index, theta1),
                self.second.eval_g(index, theta2, context),
            ]
        )

    def eval_h(self, index: int, theta: Parameter) -> Array:
        theta1, theta2 = self.split(theta)
        context = self.coupling.transform(theta1)
        d1, d2 = self.first.dim, self.second.dim
        h = np.zeros((d1 + d2, d1 + d2))
        h[:d1, :d1] = self.first.eval_h(index, theta1)
        h[d1:, :d1] = self.second.eval_h_context(
            index, theta2, context
        ) @ self.coupling.jacobian(theta1)
        h[d1:, d1:] = self.second.eval_h(index, theta2, context)
        return h

    def g_all(self, theta: Parameter) -> Array:
        theta1, theta2 = self.split(theta)
        context = self.coupling.transform(theta1)
        return np.hstack(
            [self.first.g_all(theta1), self.second.g_all(theta2, context)]
        )

    def h_all(self, theta: Parameter) -> Array:
        theta1, theta2 = self.split(theta)
        context = self.coupling.transform(theta1)
        d1, d2 = self.first.dim, self.second.dim
        h = np.zeros((self.n_points, d1 + d2, d1 + d2))
        h[:, :d1, :d1] = self.first.h_all(theta1)
        h[:, d1:, :d1] = np.einsum(
            "nic,cj->nij",
            self.second.h_context_all(theta2, context),
            self.coupling.jacobian(theta1),
        )
        h[:, d1:, d1:] = self.second.h_all(theta2, context)
        return h


def stack_equations(
    first: EstimatingEquation,
    second: CoupledStage,
    coupling: Coupling,
) -> StackedEquation:
    """
    Represent a two-stage estimator as a single estimating equation.

    Args:
        first: First-stage equation over θ₁ ∈ R^{D₁}.
        second: Second stage over θ₂ ∈ R^{D₂} reading c(θ₁).
        coupling: The map c from θ₁ to the second-stage context.

    Returns:
        Equation over the concatenated parameter of dimension D₁ + D₂.

    Raises:
        InputError: If data sizes or coupling dimensions do not line up.
    """
    if first.n_points != second.n_points:
        raise InputError(
            f"Stages have different sizes: N={first.n_points} vs "
            f"N={second.n_points}"
        )
    if coupling.input_dim != first.dim:
        raise InputError(
            f"Coupling reads {coupling.input_dim} parameters, first stage "
            f"has D={first.dim}"
        )
    if coupling.output_dim != second.context_dim:
        raise InputError(
            f"Coupling produces {coupling.output_dim} values, second stage "
            f"expects {second.context_dim}"
        )
    return StackedEquation(first, second, coupling)
