"""
Infinitesimal-jackknife predictions around a base fit.

The base fit θ̂₁ solves G(θ, 1_w) = 0. With H₁ = H(θ̂₁, 1_w) factorised
once, the IJ estimate for any weight vector is

    θ̂_IJ(w) = θ̂₁ − H₁⁻¹ (1/N) Σ_n (w_n − 1) g_n(θ̂₁)

so each new weight vector costs one sparse gradient sum and one solve.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgWarning, cho_factor, cho_solve, lu_factor, lu_solve

from ijkit.core import (
    EstimatingEquation,
    Parameter,
    WeightVector,
    as_parameter,
    check_finite,
    eval_H,
    hvp,
    weighted_sum,
)
from ijkit.errors import InputError, SingularityError
from ijkit.solver import (
    FitResult,
    SolverOptions,
    iterative_solve,
    smallest_singular_value_operator,
)
from ijkit.utils import make_rng

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
Solver = Callable[[Array], Array]

POWER_ITERATIONS = 20
DEFAULT_QUAD_POINTS = 16


@dataclass(frozen=True, eq=False)
class HessianHandle:
    """
    H₁ and a reusable way to solve H₁ x = b.

    ``h1`` is None in matrix_free mode, where solves run CG (or GMRES for
    asymmetric H₁) on Hessian-vector products at the base fit.
    """

    h1: Array | None
    base_theta: Parameter
    min_eig_estimate: float
    mode: Literal["dense", "matrix_free"]
    factorization: str
    _solve: Solver
    _solve_many: Callable[[Array], Array]

    @property
    def dim(self) -> int:
        return int(self.base_theta.shape[0])

    def solve(self, rhs: npt.ArrayLike) -> Array:
        """x with H₁ x = rhs."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if not np.any(rhs):
            return np.zeros(self.dim)
        return self._solve(rhs)

    def solve_many(self, rhs: npt.ArrayLike) -> Array:
        """Column-wise solves for a (D, M) right-hand side."""
        rhs = np.asarray(rhs, dtype=np.float64).reshape(self.dim, -1)
        return self._solve_many(rhs)


@dataclass(frozen=True, eq=False)
class GradientCache:
    """g_n(θ̂₁) for every datum, shape (N, D)."""

    g_at_base: Array

    def __post_init__(self) -> None:
        self.g_at_base.flags.writeable = False

    @property
    def n_points(self) -> int:
        return int(self.g_at_base.shape[0])

    def weighted_gradient(self, w: WeightVector) -> Array:
        """G(θ̂₁, Δw) = (1/N) Σ Δw_n g_n(θ̂₁) over the support of Δw."""
        if w.n != self.n_points:
            raise InputError(
                f"Weight vector has length {w.n}, cache has N={self.n_points}"
            )
        idx, delta = w.delta_support()
        if idx.size == 0:
            return np.zeros(self.g_at_base.shape[1])
        return (delta @ self.g_at_base[idx]) / self.n_points


def _inverse_power(solve: Solver, solve_t: Solver, dim: int) -> float:
    """Estimate σ_min(H) by inverse iteration on HᵀH."""
    x = make_rng(0).standard_normal(dim)
    x /= np.linalg.norm(x)
    growth = 0.0
    for _ in range(POWER_ITERATIONS):
        z = solve(solve_t(x))
        growth = float(np.linalg.norm(z))
        if not np.isfinite(growth) or growth == 0.0:
            return 0.0
        x = z / growth
    return float(1.0 / np.sqrt(growth))


def _dense_handle(
    h1: Array, base_theta: Parameter, symmetric: bool
) -> HessianHandle:
    theta = base_theta
    if symmetric:
        try:
            factor = cho_factor(h1, check_finite=False)
        except np.linalg.LinAlgError:
            factor = None
        if factor is not None:

            def chol_solve(b: Array) -> Array:
                return cho_solve(factor, b, check_finite=False)

            sigma = _inverse_power(chol_solve, chol_solve, h1.shape[0])
            return HessianHandle(
                h1, theta, sigma, "dense", "cholesky", chol_solve, chol_solve
            )

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu_piv = lu_factor(h1, check_finite=False)
    if np.any(np.diag(lu_piv[0]) == 0.0):
        raise SingularityError(theta, 0.0)

    def solve(b: Array) -> Array:
        return lu_solve(lu_piv, b, check_finite=False)

    def solve_t(b: Array) -> Array:
        return lu_solve(lu_piv, b, trans=1, check_finite=False)

    sigma = _inverse_power(solve, solve_t, h1.shape[0])
    return HessianHandle(h1, theta, sigma, "dense", "lu", solve, solve)


def _matrix_free_handle(
    eq: EstimatingEquation,
    base_theta: Parameter,
    opts: SolverOptions,
    threads: int,
) -> HessianHandle:
    ones = WeightVector.ones(eq.n_points)
    rtol = min(opts.cg_tol, 1e-10)

    def matvec(v: Array) -> Array:
        return hvp(eq, base_theta, ones, v, threads)

    def rmatvec(v: Array) -> Array:
        return hvp(eq, base_theta, ones, v, threads, transpose=True)

    def solve(b: Array) -> Array:
        return iterative_solve(
            matvec, b, eq.symmetric, rtol=rtol, maxiter=opts.cg_max_iter
        )

    def solve_many(b: Array) -> Array:
        return np.column_stack([solve(b[:, m]) for m in range(b.shape[1])])

    sigma = smallest_singular_value_operator(
        matvec, rmatvec, eq.dim, eq.symmetric
    )
    method = "cg" if eq.symmetric else "gmres"
    return HessianHandle(
        None, base_theta, sigma, "matrix_free", method, solve, solve_many
    )


def build_handle(
    eq: EstimatingEquation,
    base: FitResult,
    mode: Literal["auto", "dense", "matrix_free"] = "dense",
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> tuple[HessianHandle, GradientCache]:
    """
    Assemble and factorise H₁ and cache the gradients at θ̂₁.

    Args:
        eq: Estimating equation the base fit solved.
        base: Converged fit at the all-ones weights.
        mode: dense factorisation, matrix_free products, or auto by size.
        opts: Supplies min_hessian_eig, dense_cutoff and CG settings.
        threads: Threads for the reductions over data points.

    Returns:
        (handle, cache).

    Raises:
        InputError: base did not converge or was fitted at other weights.
        SingularityError: σ_min(H₁) estimate at or below min_hessian_eig.
    """
    opts = opts or SolverOptions()
    if not base.converged:
        raise InputError("build_handle needs a converged base fit")
    if base.weights is not None and not base.weights.is_ones:
        raise InputError("The base fit must use the all-ones weight vector")
    theta = as_parameter(base.theta, eq.dim)
    theta.flags.writeable = False

    if mode == "auto":
        mode = "dense" if eq.dim <= opts.dense_cutoff else "matrix_free"

    if mode == "dense":
        h1 = eval_H(eq, theta, WeightVector.ones(eq.n_points), threads)
        h1.flags.writeable = False
        handle = _dense_handle(h1, theta, eq.symmetric)
    elif mode == "matrix_free":
        handle = _matrix_free_handle(eq, theta, opts, threads)
    else:
        raise InputError(f"Unknown Hessian mode: {mode}")

    if not (
        np.isfinite(handle.min_eig_estimate)
        and handle.min_eig_estimate > opts.min_hessian_eig
    ):
        raise SingularityError(theta, handle.min_eig_estimate)

    g = eq.g_all(theta)
    check_finite(g)
    cache = GradientCache(np.array(g, dtype=np.float64))
    logger.info(
        "Built %s Hessian handle (%s), D=%d, sigma_min~%.3e",
        handle.mode,
        handle.factorization,
        handle.dim,
        handle.min_eig_estimate,
    )
    return handle, cache


def ij_predict(
    handle: HessianHandle, cache: GradientCache, w: WeightVector
) -> Parameter:
    """
    θ̂_IJ(w) = θ̂₁ − H₁⁻¹ G(θ̂₁, Δw).

    Only the entries where w differs from one are touched; w = 1_w
    returns θ̂₁ exactly.
    """
    rhs = cache.weighted_gradient(w)
    if not np.any(rhs):
        return np.array(handle.base_theta)
    return handle.base_theta - handle.solve(rhs)


def ij_batch(
    handle: HessianHandle,
    cache: GradientCache,
    weights: Sequence[WeightVector],
) -> list[Parameter]:
    """ij_predict for many weight vectors with one multi-column solve."""
    if not weights:
        return []
    rhs = np.column_stack([cache.weighted_gradient(w) for w in weights])
    active = np.flatnonzero(np.any(rhs != 0.0, axis=0))
    offsets = np.zeros_like(rhs)
    if active.size:
        offsets[:, active] = handle.solve_many(rhs[:, active])
    return [handle.base_theta - offsets[:, m] for m in range(len(weights))]


def dtheta_dw_action(
    handle: HessianHandle, cache: GradientCache, direction: npt.ArrayLike
) -> Array:
    """
    Directional derivative dθ̂(w)/dwᵀ a at w = 1_w.

    Equals −H₁⁻¹ (1/N) Σ_n a_n g_n(θ̂₁).
    """
    a = np.asarray(direction, dtype=np.float64).reshape(-1)
    if a.shape[0] != cache.n_points:
        raise InputError(
            f"Direction has length {a.shape[0]}, cache has N={cache.n_points}"
        )
    rhs = weighted_sum(cache.g_at_base, a) / cache.n_points
    return -handle.solve(rhs)


def influence_scores(handle: HessianHandle, cache: GradientCache) -> Array:
    """
    Row n is dθ̂/dw_n = −H₁⁻¹ g_n(θ̂₁) / N, shape (N, D).

    The leave-one-out IJ offset θ̂_IJ − θ̂₁ for datum n is minus row n.
    """
    return -handle.solve_many(cache.g_at_base.T).T / cache.n_points


def ij_covariance(handle: HessianHandle, cache: GradientCache) -> Array:
    """
    IJ (sandwich) covariance (1/N²) Σ_n H₁⁻¹ g_n g_nᵀ H₁⁻ᵀ.

    Multinomial bootstrap weights approximate this covariance for θ̂.
    """
    scores = influence_scores(handle, cache)
    return scores.T @ scores


def integrated_hessian(
    eq: EstimatingEquation,
    base_theta: npt.ArrayLike,
    theta: npt.ArrayLike,
    w: WeightVector,
    quad_points: int = DEFAULT_QUAD_POINTS,
    threads: int = 1,
) -> Array:
    """
    ∫₀¹ H(θ̂₁ + t(θ − θ̂₁), w) dt by Gauss-Legendre quadrature.

    It satisfies G(θ, w) − G(θ̂₁, w) = H̃ (θ − θ̂₁) up to quadrature error.

    Raises:
        InputError: quad_points < 2 or dimension mismatch.
    """
    if quad_points < 2:
        raise InputError(f"quad_points must be >= 2, got {quad_points}")
    start = as_parameter(base_theta, eq.dim)
    end = as_parameter(theta, eq.dim)
    if np.array_equal(start, end):
        return eval_H(eq, start, w, threads)

    nodes, node_weights = np.polynomial.legendre.leggauss(quad_points)
    ts = 0.5 * (nodes + 1.0)
    total = np.zeros((eq.dim, eq.dim))
    for t, weight in zip(ts, 0.5 * node_weights, strict=True):
        total += weight * eval_H(eq, start + t * (end - start), w, threads)
    return total
