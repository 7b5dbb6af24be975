"""
Aggregate quantities G(θ, w) and H(θ, w).

Sums over data points are reduced over fixed-size chunks and the chunk
partials are combined pairwise in a fixed tree order, so the result does
not depend on how many threads computed the partials.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt

from ijkit.errors import EvaluationError, InputError

from .equation import EstimatingEquation
from .types import Parameter, WeightVector, as_parameter

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

CHUNK_SIZE = 1024


def _pairwise_combine(partials: list[Array]) -> Array:
    while len(partials) > 1:
        merged = [
            partials[i] + partials[i + 1] for i in range(0, len(partials) - 1, 2)
        ]
        if len(partials) % 2:
            merged.append(partials[-1])
        partials = merged
    return partials[0]


def weighted_sum(
    rows: Array, weights: Array, threads: int = 1
) -> Array:
    """
    Σ_n weights[n] · rows[n] with deterministic chunked reduction.

    Args:
        rows: Array of shape (N, ...).
        weights: Length-N weights.
        threads: Worker threads for the chunk partials.

    Returns:
        Array of shape rows.shape[1:].
    """
    n = rows.shape[0]
    if n == 0:
        return np.zeros(rows.shape[1:])

    bounds = [(s, min(s + CHUNK_SIZE, n)) for s in range(0, n, CHUNK_SIZE)]

    def partial(span: tuple[int, int]) -> Array:
        lo, hi = span
        return np.tensordot(weights[lo:hi], rows[lo:hi], axes=(0, 0))

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(partial, bounds))
    else:
        partials = [partial(span) for span in bounds]
    return _pairwise_combine(partials)


def check_finite(rows: Array) -> None:
    """Raise EvaluationError naming the first datum with a non-finite value."""
    if rows.size == 0:
        return
    flat = rows.reshape(rows.shape[0], -1)
    bad = ~np.all(np.isfinite(flat), axis=1)
    if np.any(bad):
        raise EvaluationError(int(np.flatnonzero(bad)[0]))


def _check_inputs(
    eq: EstimatingEquation, theta: Parameter, w: WeightVector
) -> Parameter:
    theta = as_parameter(theta, eq.dim)
    if w.n != eq.n_points:
        raise InputError(
            f"Weight vector has length {w.n}, equation has N={eq.n_points}"
        )
    return theta


def eval_G(
    eq: EstimatingEquation,
    theta: Parameter,
    w: WeightVector,
    threads: int = 1,
) -> Array:
    """
    G(θ, w) = (1/N) Σ_n w_n g_n(θ).

    Raises:
        InputError: If θ or w do not match the equation's dimensions.
        EvaluationError: If some g_n(θ) is not finite.
    """
    theta = _check_inputs(eq, theta, w)
    g = eq.g_all(theta)
    check_finite(g)
    return weighted_sum(g, w.dense(), threads) / eq.n_points


def eval_H(
    eq: EstimatingEquation,
    theta: Parameter,
    w: WeightVector,
    threads: int = 1,
) -> Array:
    """
    H(θ, w) = (1/N) Σ_n w_n h_n(θ).

    Raises:
        InputError: If θ or w do not match the equation's dimensions.
        EvaluationError: If some h_n(θ) is not finite.
    """
    theta = _check_inputs(eq, theta, w)
    h = eq.h_all(theta)
    check_finite(h)
    return weighted_sum(h, w.dense(), threads) / eq.n_points


def hvp(
    eq: EstimatingEquation,
    theta: Parameter,
    w: WeightVector,
    v: npt.ArrayLike,
    threads: int = 1,
    transpose: bool = False,
) -> Array:
    """
    Matrix-free product H(θ, w) v, or H(θ, w)ᵀ v when transpose.

    Raises:
        InputError: On dimension mismatch.
        EvaluationError: If some h_n(θ) v is not finite.
    """
    theta = _check_inputs(eq, theta, w)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (eq.dim,):
        raise InputError(f"Vector has shape {v.shape}, expected ({eq.dim},)")
    if transpose:
        rows = eq.ht_vector_products(theta, v)
    else:
        rows = eq.h_vector_products(theta, v)
    check_finite(rows)
    return weighted_sum(rows, w.dense(), threads) / eq.n_points


def finite_diff_check(
    eq: EstimatingEquation, theta: Parameter, step: float = 1e-5
) -> float:
    """
    Compare the analytic h_n with central differences of g_n.

    Args:
        eq: Equation to check.
        theta: Point of evaluation.
        step: Finite-difference step, > 0.

    Returns:
        max over n, i, j of |Δg/Δθ − h| / (1 + |h|).

    Raises:
        InputError: If step is not positive.
    """
    if not step > 0:
        raise InputError(f"Finite-difference step must be > 0, got {step}")
    theta = as_parameter(theta, eq.dim)

    h = eq.h_all(theta)
    check_finite(h)
    numeric = np.empty_like(h)
    for j in range(eq.dim):
        offset = np.zeros(eq.dim)
        offset[j] = step
        g_plus = eq.g_all(theta + offset)
        g_minus = eq.g_all(theta - offset)
        check_finite(g_plus)
        check_finite(g_minus)
        numeric[:, :, j] = (g_plus - g_minus) / (2.0 * step)

    if h.size == 0:
        return 0.0
    error = float(np.max(np.abs(numeric - h) / (1.0 + np.abs(h))))
    logger.debug("finite_diff_check: max relative error %.3e", error)
    return error
