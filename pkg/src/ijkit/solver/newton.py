"""
Damped Newton solver for weighted estimating equations.

Each iteration solves (H(θ, w) + λ·s·I) step = −G(θ, w), where s is the
mean absolute diagonal of H. Matrix-free solves estimate s as |tr H|/D
from a fixed set of Rademacher vectors, exact for diagonal H. λ starts at zero; a step is accepted only
when it reduces ‖G‖₂, otherwise λ is raised and the step recomputed.
After an accepted step λ is relaxed tenfold and dropped back to zero once
it falls below the initial damping.

Non-convergence is reported through FitResult. A candidate optimum whose
Hessian is degenerate is either reported as diverging (the iterates were
still moving, e.g. separable logistic data) or raises SingularityError.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from ijkit.core import (
    EstimatingEquation,
    Parameter,
    WeightVector,
    as_parameter,
    eval_G,
    eval_H,
    hvp,
)
from ijkit.errors import IJKitError, InputError, SingularityError
from ijkit.utils import RefitLogger, make_rng

from .config import SolverOptions
from .linear import (
    iterative_solve,
    smallest_singular_value,
    smallest_singular_value_operator,
)

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

# Accepted steps at least this long, this many times in a row, mean the
# iterates are running off rather than settling.
_ESCAPE_STEP = 0.1
_ESCAPE_RUN = 3

# Rademacher vectors for the matrix-free damping scale.
_TRACE_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a fit: the parameter and how it was reached."""

    theta: Parameter
    grad_norm: float
    iterations: int
    converged: bool
    status: str = "converged"
    message: str = ""
    weights: WeightVector | None = None

    def __post_init__(self) -> None:
        self.theta.flags.writeable = False


class _Newton:
    """State of one solve() call."""

    def __init__(
        self,
        eq: EstimatingEquation,
        w: WeightVector,
        opts: SolverOptions,
        threads: int,
    ) -> None:
        self.eq = eq
        self.w = w
        self.opts = opts
        self.threads = threads
        self.mode = opts.resolved_mode(eq.dim)

    def gradient(self, theta: Parameter) -> Array:
        return eval_G(self.eq, theta, self.w, self.threads)

    def step(self, theta: Parameter, grad: Array, damping: float) -> Array:
        """Solve the (damped) Newton system; LinAlgError if singular."""
        if self.mode == "dense":
            hessian = eval_H(self.eq, theta, self.w, self.threads)
            if damping > 0.0:
                scale = max(float(np.mean(np.abs(np.diag(hessian)))), 1e-300)
                hessian = hessian + damping * scale * np.eye(self.eq.dim)
            step = np.linalg.solve(hessian, -grad)
        else:
            shift = damping * self.trace_scale(theta) if damping > 0.0 else 0.0

            def matvec(v: Array) -> Array:
                return hvp(self.eq, theta, self.w, v, self.threads) + shift * v

            step = iterative_solve(
                matvec,
                -grad,
                symmetric=self.eq.symmetric,
                rtol=self.opts.cg_tol,
                maxiter=self.opts.cg_max_iter,
            )
        if not np.all(np.isfinite(step)):
            raise np.linalg.LinAlgError("non-finite Newton step")
        return step

    def trace_scale(self, theta: Parameter) -> float:
        """|tr H(θ, w)|/D by Hutchinson estimation with a fixed seed."""
        dim = self.eq.dim
        signs = make_rng(0).choice([-1.0, 1.0], size=(_TRACE_SAMPLES, dim))
        quadratic = [
            float(z @ hvp(self.eq, theta, self.w, z, self.threads))
            for z in signs
        ]
        return max(abs(float(np.mean(quadratic))) / dim, 1e-300)

    def min_singular_value(self, theta: Parameter) -> float:
        if self.mode == "dense":
            return smallest_singular_value(
                eval_H(self.eq, theta, self.w, self.threads)
            )
        return smallest_singular_value_operator(
            lambda v: hvp(self.eq, theta, self.w, v, self.threads),
            lambda v: hvp(
                self.eq, theta, self.w, v, self.threads, transpose=True
            ),
            self.eq.dim,
            self.eq.symmetric,
        )


def solve(
    eq: EstimatingEquation,
    w: WeightVector,
    init: npt.ArrayLike,
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> FitResult:
    """
    Find θ̂(w), a root of G(θ, w) = 0.

    Args:
        eq: Estimating equation.
        w: Weight vector of length N.
        init: Starting parameter.
        opts: Solver options (defaults when omitted).
        threads: Threads for the reductions over data points.

    Returns:
        FitResult; converged is False when max_iter is hit, when no
        damping makes progress, or when the iterates diverge.

    Raises:
        InputError: Non-finite init or dimension mismatch.
        SingularityError: The Hessian at a candidate optimum has smallest
            singular value below opts.min_hessian_eig.
        EvaluationError: Some g_n is not finite at init.
    """
    opts = opts or SolverOptions()
    theta = as_parameter(init, eq.dim)
    if w.n != eq.n_points:
        raise InputError(
            f"Weight vector has length {w.n}, equation has N={eq.n_points}"
        )

    newton = _Newton(eq, w, opts, threads)
    grad = newton.gradient(theta)
    grad_norm = float(np.linalg.norm(grad))
    damping = 0.0
    recent_steps: list[float] = []

    for iteration in range(opts.max_iter + 1):
        if grad_norm <= opts.grad_tol:
            sigma = newton.min_singular_value(theta)
            if sigma >= opts.min_hessian_eig:
                logger.debug(
                    "Converged in %d iterations, |G|=%.3e", iteration, grad_norm
                )
                return FitResult(theta, grad_norm, iteration, True, weights=w)
            if len(recent_steps) >= _ESCAPE_RUN and all(
                s >= _ESCAPE_STEP for s in recent_steps[-_ESCAPE_RUN:]
            ):
                return FitResult(
                    theta,
                    grad_norm,
                    iteration,
                    False,
                    status="diverging",
                    message=(
                        "Gradient vanished while the parameter kept moving "
                        f"(|theta|={np.linalg.norm(theta):.3e}); the "
                        "estimate does not exist at finite theta"
                    ),
                    weights=w,
                )
            raise SingularityError(theta, sigma)

        if iteration == opts.max_iter:
            break

        accepted = False
        for _ in range(opts.max_damping_increases + 1):
            try:
                step = newton.step(theta, grad, damping)
                candidate = theta + step
                new_grad = newton.gradient(candidate)
                new_norm = float(np.linalg.norm(new_grad))
                accepted = new_norm < grad_norm
            except (np.linalg.LinAlgError, IJKitError) as e:
                logger.debug("Step rejected at damping %.1e: %s", damping, e)
                accepted = False
            if accepted:
                break
            damping = opts.initial_damping if damping == 0.0 else damping * 10.0

        if not accepted:
            return FitResult(
                theta,
                grad_norm,
                iteration,
                False,
                status="stalled",
                message=(
                    f"No damping up to {damping:.1e} reduced |G| "
                    f"below {grad_norm:.3e}"
                ),
                weights=w,
            )

        recent_steps.append(float(np.linalg.norm(step)))
        theta, grad, grad_norm = candidate, new_grad, new_norm
        damping = damping / 10.0
        if damping < opts.initial_damping:
            damping = 0.0
        logger.debug(
            "Iteration %d: |G|=%.3e |step|=%.3e",
            iteration + 1,
            grad_norm,
            recent_steps[-1],
        )

    return FitResult(
        theta,
        grad_norm,
        opts.max_iter,
        False,
        status="max_iter",
        message=f"|G|={grad_norm:.3e} after {opts.max_iter} iterations",
        weights=w,
    )


def _solve_entry(
    eq: EstimatingEquation,
    w: WeightVector,
    base: FitResult,
    opts: SolverOptions,
) -> FitResult:
    try:
        return solve(eq, w, base.theta, opts)
    except IJKitError as e:
        return FitResult(
            np.array(base.theta),
            float("nan"),
            0,
            False,
            status="error",
            message=f"{type(e).__name__}: {e}",
            weights=w,
        )


def warm_start_batch(
    eq: EstimatingEquation,
    weights: Sequence[WeightVector],
    base: FitResult,
    opts: SolverOptions | None = None,
    threads: int = 1,
    progress_bar: bool = False,
    table_log_freq: int = 0,
) -> list[FitResult]:
    """
    Exact refits θ̂(w) for many weight vectors, each started at base.theta.

    Results are in input order. Errors in one refit are recorded in its
    FitResult (status "error") and do not stop the batch.

    Raises:
        InputError: If base did not converge.
    """
    if not base.converged:
        raise InputError("warm_start_batch needs a converged base fit")
    opts = opts or SolverOptions()

    def run(w: WeightVector) -> FitResult:
        return _solve_entry(eq, w, base, opts)

    results: list[FitResult] = []
    with RefitLogger(
        total=len(weights),
        progress_bar=progress_bar,
        table_log_freq=table_log_freq,
    ) as refits:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = pool.map(run, weights)
                for i, fit in enumerate(outcomes):
                    results.append(fit)
                    refits.update(i, fit.grad_norm, fit.iterations, fit.converged)
        else:
            for i, w in enumerate(weights):
                fit = run(w)
                results.append(fit)
                refits.update(i, fit.grad_norm, fit.iterations, fit.converged)

    failed = sum(not fit.converged for fit in results)
    if failed:
        logger.warning("%d of %d refits did not converge", failed, len(results))
    return results
