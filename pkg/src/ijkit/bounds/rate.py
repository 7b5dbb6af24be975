"""
Empirical convergence rate of the leave-k-out IJ error.

For each problem size N the model is fitted, the leave-k-out family is
enumerated (or sampled), and the largest ‖θ̂_IJ(w) − θ̂(w)‖₂ is measured
against exact refits. The slope of log error against log N should be at
most −1.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from ijkit.core import EstimatingEquation, WeightVector
from ijkit.errors import InputError, NonConvergenceError
from ijkit.ij import build_handle
from ijkit.solver import SolverOptions, solve
from ijkit.weights import leave_k_out

from .certificate import measured_error

logger = logging.getLogger(__name__)

ModelFactory = Callable[[int, int], EstimatingEquation]


class RateReport(BaseModel):
    """Max IJ error per size and the fitted log-log slope."""

    model_config = ConfigDict(frozen=True)

    sizes: list[int]
    errors: list[float]
    k: int
    seed: int
    slope: float


def measure_rate(
    model_factory: ModelFactory,
    sizes: Sequence[int],
    k: int,
    seed: int = 0,
    limit: int | None = None,
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> RateReport:
    """
    Max leave-k-out IJ error at each size, and the log-log slope.

    Args:
        model_factory: ``(n, seed) -> EstimatingEquation``.
        sizes: Strictly increasing sizes, at least three.
        k: Points left out, ≥ 1.
        seed: Passed to the factory and to leave-k-out sampling.
        limit: Sample this many leave-k-out vectors per size.
        opts: Solver options for the base fits and refits.
        threads: Threads for the refit batches.

    Raises:
        InputError: k < 1, bad sizes, or a zero error (slope undefined).
        NonConvergenceError: A base fit or refit failed; carries the size.
    """
    if k < 1:
        raise InputError(f"The rate check needs k >= 1, got {k}")
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise InputError("The rate check needs at least three sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError(f"Sizes must be strictly increasing, got {sizes}")

    opts = opts or SolverOptions()
    errors: list[float] = []
    for n in sizes:
        eq = model_factory(n, seed)
        base = solve(eq, WeightVector.ones(n), np.zeros(eq.dim), opts)
        if not base.converged:
            raise NonConvergenceError(n, f"Base fit failed at N={n}: {base.message}")
        handle, cache = build_handle(eq, base, opts.hessian_mode, opts)
        weights = list(leave_k_out(n, k, limit, seed))
        error = measured_error(eq, base, handle, cache, weights, opts, threads)
        logger.info("N=%d: max IJ error %.3e over %d folds", n, error, len(weights))
        errors.append(error)

    if any(e <= 0.0 for e in errors):
        raise InputError("An IJ error is zero; the log-log slope is undefined")
    slope = float(np.polyfit(np.log(sizes), np.log(errors), 1)[0])
    return RateReport(sizes=sizes, errors=errors, k=k, seed=seed, slope=slope)


def corollary_rate_check(
    model_factory: ModelFactory,
    sizes: Sequence[int],
    k: int,
    seed: int = 0,
    limit: int | None = None,
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> float:
    """Least-squares slope of log max IJ error against log N."""
    return measure_rate(
        model_factory, sizes, k, seed, limit, opts, threads
    ).slope
