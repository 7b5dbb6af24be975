"""
Empirical error certificate for IJ predictions.

For a weight family W and a ball of radius r around θ̂₁:

    C_g  = sup ‖g(θ)‖₂/√N          (Frobenius over all n)
    C_h  = sup ‖h(θ)‖₂/√N
    C_op = sup ‖H(θ, 1_w)⁻¹‖_op
    L_h  = sup ‖h(θ) − h(θ̂₁)‖₂ / (√N ‖θ − θ̂₁‖₂)
    C_w  = max_w ‖w‖₂/√N
    δ    = max_w sup_θ max(‖G(θ, Δw)‖₁, ‖H(θ, Δw)‖₁)

    C_IJ = 1 + D·C_w·L_h·C_op
    Δ_δ  = min(r/C_op, 1/(2·C_IJ·C_op))
    bound = 2·C_op²·C_IJ·δ²,   valid iff δ ≤ Δ_δ

Every sup is a maximum over the domain sample, so it can understate the
true supremum; certificates carry ``sampled_sup = True`` to say so.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict
from scipy import sparse

from ijkit.core import (
    EstimatingEquation,
    Parameter,
    WeightVector,
    check_finite,
    eval_H,
)
from ijkit.errors import InputError, NonConvergenceError, SingularityError
from ijkit.ij import GradientCache, HessianHandle, ij_batch
from ijkit.solver import (
    FitResult,
    SolverOptions,
    warm_start_batch,
)

from .domain import DomainSpec

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

# Relative σ_min below which H(θ, 1_w) counts as singular.
_RANK_TOL = np.finfo(np.float64).eps


class ConstantEstimates(BaseModel):
    """Sampled estimates of C_g, C_h, C_op and L_h."""

    model_config = ConfigDict(frozen=True)

    c_g: float
    c_h: float
    c_op: float
    l_h: float
    n_points_sampled: int


class CertificateMetadata(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    n_samples: int
    n_points_sampled: int
    n_weights: int
    sampled_sup: bool = True
    method: str = "empirical"


class IJCertificate(BaseModel):
    """Constants, δ, the error bound and whether it applies."""

    model_config = ConfigDict(frozen=True)

    c_g: float
    c_h: float
    c_op: float
    l_h: float
    c_w: float
    c_ij: float
    delta_theta: float
    delta_cap: float
    delta: float
    bound: float
    valid: bool
    metadata: CertificateMetadata
    measured_error: float | None = None
    sound: bool | None = None

    def with_measured_error(self, error: float) -> IJCertificate:
        """Copy with the measured max IJ error and soundness flag set."""
        return self.model_copy(
            update={"measured_error": error, "sound": error <= self.bound}
        )


def _map_points(fn, points: Sequence[Parameter], threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def _require_converged(base: FitResult) -> None:
    if not base.converged:
        raise InputError("Certificates need a converged base fit")


def estimate_constants(
    eq: EstimatingEquation,
    base: FitResult,
    domain: DomainSpec,
    threads: int = 1,
) -> ConstantEstimates:
    """
    Estimate C_g, C_h, C_op and L_h over the domain sample.

    Raises:
        InputError: base did not converge.
        SingularityError: H(θ, 1_w) is singular at a sampled θ (carries θ).
    """
    _require_converged(base)
    n = eq.n_points
    root_n = np.sqrt(n)
    ones = WeightVector.ones(n)
    h_center = eq.h_all(domain.center)
    check_finite(h_center)

    def measure(theta: Parameter) -> tuple[float, float, float, float]:
        g = eq.g_all(theta)
        check_finite(g)
        h = eq.h_all(theta)
        check_finite(h)
        singular_values = np.linalg.svd(
            eval_H(eq, theta, ones), compute_uv=False
        )
        sigma = float(singular_values[-1])
        if sigma <= _RANK_TOL * eq.dim * singular_values[0]:
            raise SingularityError(theta, sigma)
        distance = float(np.linalg.norm(theta - domain.center))
        secant = 0.0
        if distance > 0.0:
            secant = float(np.linalg.norm(h - h_center)) / (root_n * distance)
        return (
            float(np.linalg.norm(g)) / root_n,
            float(np.linalg.norm(h)) / root_n,
            1.0 / sigma,
            secant,
        )

    points = domain.sample_points()
    values = np.array(_map_points(measure, points, threads))
    c_g, c_h, c_op, l_h = (float(v) for v in values.max(axis=0))
    logger.debug(
        "Constants over %d points: C_g=%.3e C_h=%.3e C_op=%.3e L_h=%.3e",
        len(points),
        c_g,
        c_h,
        c_op,
        l_h,
    )
    return ConstantEstimates(
        c_g=c_g, c_h=c_h, c_op=c_op, l_h=l_h, n_points_sampled=len(points)
    )


def _delta_matrix(weights: Sequence[WeightVector], n: int) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for m, w in enumerate(weights):
        if w.n != n:
            raise InputError(f"Weight vector has length {w.n}, expected {n}")
        idx, delta = w.delta_support()
        rows.append(np.full(idx.size, m))
        cols.append(idx)
        vals.append(delta)
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(weights), n),
    )


def compute_delta(
    eq: EstimatingEquation,
    base: FitResult,
    domain: DomainSpec,
    weights: Sequence[WeightVector],
    threads: int = 1,
) -> float:
    """
    Sampled δ: the largest L1 norm of G(θ, Δw) or H(θ, Δw).

    The maximum runs over the weights and the domain sample (center
    included). A family of only 1_w gives exactly 0.

    Raises:
        InputError: base did not converge, empty or mis-sized weights.
    """
    _require_converged(base)
    if not weights:
        raise InputError("compute_delta needs at least one weight vector")
    n = eq.n_points
    delta_w = _delta_matrix(weights, n)
    if delta_w.nnz == 0:
        return 0.0

    def measure(theta: Parameter) -> float:
        g = eq.g_all(theta)
        check_finite(g)
        h = eq.h_all(theta).reshape(n, -1)
        check_finite(h)
        g_term = np.abs(delta_w @ g).sum(axis=1) / n
        h_term = np.abs(delta_w @ h).sum(axis=1) / n
        return float(max(g_term.max(), h_term.max()))

    return float(max(_map_points(measure, domain.sample_points(), threads)))


def weight_constant(weights: Sequence[WeightVector]) -> float:
    """C_w = max ‖w‖₂/√N."""
    if not weights:
        raise InputError("weight_constant needs at least one weight vector")
    return float(max(w.l2_norm() / np.sqrt(w.n) for w in weights))


def certify(
    eq: EstimatingEquation,
    base: FitResult,
    domain: DomainSpec,
    weights: Sequence[WeightVector],
    threads: int = 1,
) -> IJCertificate:
    """
    Assemble the certificate for a weight family over a domain.

    Raises:
        InputError: base did not converge or weights are empty.
        SingularityError: H is singular somewhere in the sample.
    """
    constants = estimate_constants(eq, base, domain, threads)
    c_w = weight_constant(weights)
    delta = compute_delta(eq, base, domain, weights, threads)

    c_op = constants.c_op
    c_ij = 1.0 + eq.dim * c_w * constants.l_h * c_op
    delta_cap = min(domain.radius / c_op, 1.0 / (2.0 * c_ij * c_op))
    bound = 2.0 * c_op**2 * c_ij * delta**2

    certificate = IJCertificate(
        c_g=constants.c_g,
        c_h=constants.c_h,
        c_op=c_op,
        l_h=constants.l_h,
        c_w=c_w,
        c_ij=c_ij,
        delta_theta=domain.radius,
        delta_cap=delta_cap,
        delta=delta,
        bound=bound,
        valid=delta <= delta_cap,
        metadata=CertificateMetadata(
            seed=domain.seed,
            n_samples=domain.n_samples,
            n_points_sampled=constants.n_points_sampled,
            n_weights=len(weights),
        ),
    )
    logger.info(
        "Certificate: delta=%.3e cap=%.3e bound=%.3e valid=%s",
        delta,
        delta_cap,
        bound,
        certificate.valid,
    )
    return certificate


def auto_radius(
    handle: HessianHandle,
    cache: GradientCache,
    weights: Sequence[WeightVector],
    floor: float = 1e-6,
) -> float:
    """Twice the largest IJ offset ‖θ̂_IJ(w) − θ̂₁‖₂, at least floor."""
    if not floor > 0:
        raise InputError(f"Radius floor must be > 0, got {floor}")
    predictions = ij_batch(handle, cache, weights)
    largest = max(
        (float(np.linalg.norm(p - handle.base_theta)) for p in predictions),
        default=0.0,
    )
    return max(2.0 * largest, floor)


def measured_error(
    eq: EstimatingEquation,
    base: FitResult,
    handle: HessianHandle,
    cache: GradientCache,
    weights: Sequence[WeightVector],
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> float:
    """
    max_w ‖θ̂_IJ(w) − θ̂(w)‖₂ against exact warm-started refits.

    Raises:
        NonConvergenceError: Some refit did not converge.
    """
    predictions = ij_batch(handle, cache, weights)
    refits = warm_start_batch(eq, weights, base, opts, threads=threads)
    failed = [fit for fit in refits if not fit.converged]
    if failed:
        raise NonConvergenceError(
            eq.n_points,
            f"{len(failed)} exact refits did not converge at "
            f"N={eq.n_points}: {failed[0].message}",
        )
    return max(
        (
            float(np.linalg.norm(p - fit.theta))
            for p, fit in zip(predictions, refits, strict=True)
        ),
        default=0.0,
    )
