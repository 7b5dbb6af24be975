"""
Configuration for the damped Newton solver.
"""

from typing import Literal

from pydantic import Field

from ijkit.utils.config import BaseConfig


class SolverOptions(BaseConfig):
    """
    Tolerances and limits for exact fits and refits.

    Use with @config_option(ExperimentConfig) through its ``solver``
    section, or directly when calling solve().
    """

    grad_tol: float = Field(
        default=1e-10,
        gt=0,
        alias="grad-tol",
        description="Stop when the L2 norm of G(theta, w) is at most this",
    )

    max_iter: int = Field(
        default=100,
        ge=1,
        alias="max-iter",
        description="Maximum Newton iterations",
    )

    initial_damping: float = Field(
        default=1e-6,
        gt=0,
        alias="initial-damping",
        description="First Levenberg damping tried after a rejected step",
    )

    max_damping_increases: int = Field(
        default=30,
        ge=1,
        alias="max-damping-increases",
        description="Rejected steps tolerated in one iteration",
    )

    min_hessian_eig: float = Field(
        default=1e-8,
        gt=0,
        alias="min-hessian-eig",
        description="Singularity guard on the Hessian at an optimum",
    )

    hessian_mode: Literal["auto", "dense", "matrix_free"] = Field(
        default="auto",
        alias="hessian-mode",
        description="Dense factorisation or CG on Hessian-vector products",
    )

    dense_cutoff: int = Field(
        default=512,
        ge=1,
        alias="dense-cutoff",
        description="Largest dimension solved densely in auto mode",
    )

    cg_tol: float = Field(
        default=1e-12,
        gt=0,
        alias="cg-tol",
        description="Relative residual tolerance of the iterative solves",
    )

    cg_max_iter: int | None = Field(
        default=None,
        ge=1,
        alias="cg-max-iter",
        description="Iteration cap of the iterative solves (null: 10 * dim)",
    )

    def resolved_mode(self, dim: int) -> Literal["dense", "matrix_free"]:
        """The concrete mode for a problem of dimension dim."""
        if self.hessian_mode == "auto":
            return "dense" if dim <= self.dense_cutoff else "matrix_free"
        return self.hessian_mode
