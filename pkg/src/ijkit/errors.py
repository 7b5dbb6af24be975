"""
Exception hierarchy for ijkit.

Solver non-convergence is reported through ``FitResult`` and is not an
exception; everything here signals a violated precondition or a numeric
failure the caller has to act on.
"""

from __future__ import annotations

import numpy as np


class IJKitError(Exception):
    """Base class for all ijkit errors."""


class InputError(IJKitError, ValueError):
    """Invalid argument: dimension mismatch, out-of-range value, bad data."""


class EvaluationError(IJKitError):
    """A per-datum estimating function returned a non-finite value."""

    def __init__(self, index: int, message: str | None = None) -> None:
        self.index = int(index)
        super().__init__(
            message or f"Non-finite estimating function value at datum {index}"
        )


class SingularityError(IJKitError):
    """H(θ, w) is singular or nearly so (non-degeneracy violated)."""

    def __init__(
        self,
        theta: np.ndarray,
        min_singular_value: float,
        message: str | None = None,
    ) -> None:
        self.theta = np.array(theta, dtype=np.float64)
        self.min_singular_value = float(min_singular_value)
        super().__init__(
            message
            or (
                "Hessian is degenerate (smallest singular value "
                f"{self.min_singular_value:.3e}) at theta={self.theta.tolist()}"
            )
        )


class NonConvergenceError(IJKitError):
    """An exact refit failed to converge where convergence is required."""

    def __init__(self, size: int, message: str | None = None) -> None:
        self.size = int(size)
        super().__init__(
            message or f"Exact refit did not converge at N={self.size}"
        )
