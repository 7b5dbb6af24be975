"""
Experiment orchestration: CV and bootstrap accuracy, certificates, timing.

Held-out losses follow one convention everywhere: for a weight vector w
the loss is averaged over the points with w_n = 0 (the left-out fold, or
the out-of-bag points of a bootstrap draw); when w has no zero entry it
is averaged over all points. CV_IJ and CV_exact are the means of these
per-weight losses at θ̂_IJ(w) and θ̂(w).
"""

from __future__ import annotations

import logging
import statistics
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

from ijkit.bounds import (
    DomainSpec,
    RateReport,
    auto_radius,
    certify,
    measure_rate,
    measured_error,
)
from ijkit.core import WeightVector
from ijkit.errors import InputError, NonConvergenceError
from ijkit.ij import (
    GradientCache,
    HessianHandle,
    build_handle,
    ij_batch,
    ij_covariance,
)
from ijkit.models import (
    Dataset,
    GlmModel,
    SyntheticSpec,
    generate_synthetic,
    generate_test_split,
    held_out_loss,
    make_model,
    make_preset,
    read_dataset_csv,
)
from ijkit.solver import FitResult, solve, warm_start_batch
from ijkit.weights import build_family

from .config import DataConfig, ExperimentConfig
from .report import (
    BootstrapSummary,
    ExperimentReport,
    ExperimentSummary,
    FitReport,
    ReplicationResult,
    TimingSweep,
    Timings,
    WeightRecord,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class Problem:
    """A model to fit and, for synthetic data, a matching test model."""

    model: GlmModel
    test_model: GlmModel | None
    synthetic: SyntheticSpec | None


def synthetic_spec(data: DataConfig, seed: int) -> SyntheticSpec:
    """The SyntheticSpec a data section describes for one seed."""
    if data.preset is not None:
        return make_preset(
            data.preset,
            seed,
            true_bias=data.true_bias,
            noise_scale=data.noise_scale,
            has_bias=data.bias,
        )
    return SyntheticSpec(
        kind=data.model,
        n=data.n,
        p=data.p,
        seed=seed,
        true_bias=data.true_bias,
        feature_scale=data.feature_scale,
        noise_scale=data.noise_scale,
        has_bias=data.bias,
    )


def load_problem(data: DataConfig, seed: int) -> Problem:
    """
    Read or generate the data for one replication.

    Raises:
        FileNotFoundError: data_path does not exist.
        InputError: Invalid data for the model, unknown preset.
    """
    if data.data_path is not None:
        dataset = read_dataset_csv(data.data_path, has_bias=data.bias)
        return Problem(make_model(data.model, dataset), None, None)

    spec = synthetic_spec(data, seed)
    model = make_model(spec.kind, generate_synthetic(spec))
    test_model = None
    if data.test_size > 0:
        test_split = generate_test_split(spec, data.test_size)
        test_model = make_model(spec.kind, test_split)
    return Problem(model, test_model, spec)


def fit_base(model: GlmModel, config: ExperimentConfig) -> FitResult:
    """
    Fit θ̂₁ from zero.

    Raises:
        NonConvergenceError: The base fit did not converge.
    """
    base = solve(
        model,
        WeightVector.ones(model.n_points),
        np.zeros(model.dim),
        config.solver,
        threads=config.run.threads,
    )
    if not base.converged:
        raise NonConvergenceError(
            model.n_points, f"Base fit did not converge: {base.message}"
        )
    return base


def held_out_indices(w: WeightVector) -> np.ndarray:
    """Zero-weight indices, or every index when there are none."""
    left_out = w.zero_indices()
    if left_out.size:
        return left_out
    return np.arange(w.n)


def _timed(fn: Callable[[], T]) -> tuple[T, float]:
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def _mean(values: Sequence[float]) -> float | None:
    return float(np.mean(values)) if values else None


@dataclass
class _Replication:
    result: ReplicationResult
    phases: dict[str, float]
    problem: Problem
    base: FitResult
    handle: HessianHandle
    cache: GradientCache
    weights: list[WeightVector]

    @property
    def model_name(self) -> str:
        return self.problem.model.kind.value


def _run_replication(
    config: ExperimentConfig,
    replication: int,
    compare_exact: bool,
) -> _Replication:
    seed = config.run.seed + replication
    problem = load_problem(config.data, seed)
    model = problem.model
    threads = config.run.threads
    phases: dict[str, float] = {}

    base, phases["base_fit"] = _timed(lambda: fit_base(model, config))
    (handle, cache), phases["build_handle"] = _timed(
        lambda: build_handle(
            model, base, config.solver.hessian_mode, config.solver, threads
        )
    )
    weights = build_family(config.weights, model.n_points, cache, seed)
    thetas_ij, phases["ij_batch"] = _timed(
        lambda: ij_batch(handle, cache, weights)
    )

    refits: list[FitResult] | None = None
    if compare_exact:
        refits, phases["exact_batch"] = _timed(
            lambda: warm_start_batch(
                model,
                weights,
                base,
                config.solver,
                threads=threads,
                progress_bar=config.run.progress_bar,
                table_log_freq=config.run.table_log_freq,
            )
        )

    records: list[WeightRecord] = []
    losses_ij: list[float] = []
    losses_exact: list[float] = []
    for i, (w, theta_ij) in enumerate(zip(weights, thetas_ij, strict=True)):
        indices = held_out_indices(w)
        loss_ij = held_out_loss(model, theta_ij, indices)
        losses_ij.append(loss_ij)
        fields: dict = {}
        if refits is not None:
            fit = refits[i]
            fields = {"converged": fit.converged, "status": fit.status}
            if fit.converged:
                loss_exact = held_out_loss(model, fit.theta, indices)
                losses_exact.append(loss_exact)
                fields.update(
                    theta_exact=fit.theta.tolist(),
                    gap_l2=float(np.linalg.norm(theta_ij - fit.theta)),
                    loss_exact=loss_exact,
                )
        records.append(
            WeightRecord(
                weight_id=i,
                replication=replication,
                support_size=w.support_size,
                held_out=int(indices.size),
                theta_ij=theta_ij.tolist(),
                loss_ij=loss_ij,
                **fields,
            )
        )

    bootstrap_summary = None
    if config.weights.family == "bootstrap":
        std_exact = None
        if refits is not None and all(fit.converged for fit in refits):
            std_exact = np.std([fit.theta for fit in refits], axis=0).tolist()
        bootstrap_summary = BootstrapSummary(
            std_ij=np.std(thetas_ij, axis=0).tolist(),
            std_exact=std_exact,
            ij_standard_errors=np.sqrt(
                np.diag(ij_covariance(handle, cache))
            ).tolist(),
        )

    test_loss = None
    if problem.test_model is not None:
        test_loss = held_out_loss(
            problem.test_model,
            base.theta,
            np.arange(problem.test_model.n_points),
        )

    failed = 0 if refits is None else sum(not fit.converged for fit in refits)
    result = ReplicationResult(
        replication=replication,
        seed=seed,
        n=model.n_points,
        dim=model.dim,
        theta_hat=base.theta.tolist(),
        base_grad_norm=base.grad_norm,
        base_iterations=base.iterations,
        train_loss=held_out_loss(model, base.theta, np.arange(model.n_points)),
        cv_ij=float(np.mean(losses_ij)),
        cv_exact=_mean(losses_exact),
        test_loss=test_loss,
        failed_refits=failed,
        records=records,
        bootstrap=bootstrap_summary,
    )
    logger.info(
        "Replication %d: train=%.6f cv_ij=%.6f cv_exact=%s",
        replication,
        result.train_loss,
        result.cv_ij,
        "n/a" if result.cv_exact is None else f"{result.cv_exact:.6f}",
    )
    return _Replication(result, phases, problem, base, handle, cache, weights)


def _summarize(results: Sequence[ReplicationResult]) -> ExperimentSummary:
    compared = [
        (r.cv_ij, r.cv_exact, r.train_loss)
        for r in results
        if r.cv_exact is not None
    ]
    closer = underestimates = None
    if compared:
        closer = float(
            np.mean([abs(ij - ex) < abs(ex - tr) for ij, ex, tr in compared])
        )
        underestimates = float(np.mean([ij <= ex for ij, ex, _ in compared]))
    gaps = [
        record.gap_l2
        for r in results
        for record in r.records
        if record.gap_l2 is not None
    ]
    tests = [r.test_loss for r in results if r.test_loss is not None]
    return ExperimentSummary(
        replications=len(results),
        mean_train_loss=float(np.mean([r.train_loss for r in results])),
        mean_cv_ij=float(np.mean([r.cv_ij for r in results])),
        mean_cv_exact=_mean([ex for _, ex, _ in compared]),
        mean_test_loss=_mean(tests),
        frac_ij_closer_than_train=closer,
        frac_ij_underestimates=underestimates,
        max_gap_l2=max(gaps) if gaps else None,
    )


def _timings(phase_runs: Sequence[dict[str, float]]) -> Timings:
    def median(key: str) -> float | None:
        values = [run[key] for run in phase_runs if key in run]
        return statistics.median(values) if values else None

    build = median("build_handle") or 0.0
    batch = median("ij_batch") or 0.0
    exact = median("exact_batch")
    ij_total = build + batch
    return Timings(
        repeats=len(phase_runs),
        base_fit=median("base_fit") or 0.0,
        build_handle=build,
        ij_batch=batch,
        exact_batch=exact,
        ij_total=ij_total,
        exact_total=exact,
        ratio=None if not exact else ij_total / exact,
    )


def run_accuracy_experiment(
    config: ExperimentConfig, command: str = "ij-cv"
) -> ExperimentReport:
    """
    CV_IJ (and CV_exact when compare_exact) over all replications.

    Replication r uses seed run.seed + r. Wall-clock timings are included
    only when run.record_timings is set.
    """
    runs = [
        _run_replication(config, r, config.run.compare_exact)
        for r in range(config.run.repetitions)
    ]
    results = [run.result for run in runs]
    summary = _summarize(results)
    if summary.frac_ij_underestimates is not None and (
        summary.frac_ij_underestimates < 0.7
    ):
        logger.warning(
            "CV_IJ underestimated CV_exact in only %.0f%% of replications",
            100 * summary.frac_ij_underestimates,
        )
    return ExperimentReport(
        command=command,
        model=runs[0].model_name,
        family=config.weights.family,
        n_weights=len(results[0].records),
        replications=results,
        summary=summary,
        timings=(
            _timings([run.phases for run in runs])
            if config.run.record_timings
            else None
        ),
    )


def run_certify_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Certificate for the configured family on the first replication.

    The domain radius is domain.radius or, when unset, auto_radius floored
    at domain.min_radius. With compare_exact the measured max IJ error and
    soundness flag are added.
    """
    run = _run_replication(config, 0, compare_exact=False)
    model, base, weights = run.problem.model, run.base, run.weights
    radius = config.domain.radius
    if radius is None:
        radius = auto_radius(
            run.handle, run.cache, weights, config.domain.min_radius
        )
    domain = DomainSpec(
        center=base.theta,
        radius=radius,
        n_samples=config.domain.n_samples,
        seed=config.run.seed,
    )
    certificate = certify(model, base, domain, weights, config.run.threads)
    if config.run.compare_exact:
        error = measured_error(
            model,
            base,
            run.handle,
            run.cache,
            weights,
            config.solver,
            config.run.threads,
        )
        certificate = certificate.with_measured_error(error)

    return ExperimentReport(
        command="certify",
        model=run.model_name,
        family=config.weights.family,
        n_weights=len(weights),
        replications=[run.result],
        summary=_summarize([run.result]),
        certificate=certificate,
        timings=_timings([run.phases]) if config.run.record_timings else None,
    )


def run_timing_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Median wall-clock time of the IJ path against exact refits.

    The same data, fit and weight list are timed run.timing_repeats
    times; exact refits always run.
    """
    if config.run.timing_repeats < 1:
        raise InputError("timing_repeats must be >= 1")
    runs = [
        _run_replication(config, 0, compare_exact=True)
        for _ in range(config.run.timing_repeats)
    ]
    timings = _timings([run.phases for run in runs]).model_copy(
        update={"n": runs[-1].problem.model.n_points}
    )
    logger.info(
        "IJ total %.4fs vs exact %.4fs (ratio %s)",
        timings.ij_total,
        timings.exact_total or 0.0,
        "n/a" if timings.ratio is None else f"{timings.ratio:.3f}",
    )
    result = runs[-1].result
    return ExperimentReport(
        command="bench",
        model=runs[-1].model_name,
        family=config.weights.family,
        n_weights=len(result.records),
        replications=[result],
        summary=_summarize([result]),
        timings=timings,
    )

def run_timing_sweep(
    config: ExperimentConfig, sizes: Sequence[int]
) -> TimingSweep:
    """
    run_timing_experiment on synthetic data of each size in turn.

    Everything but data.n is taken from config; each size contributes
    one Timings row.

    Raises:
        InputError: data_path or a preset is set, or sizes are empty or
            not positive.
    """
    if config.data.data_path is not None:
        raise InputError("The timing sweep needs synthetic data, not data_path")
    if config.data.preset is not None:
        raise InputError("Presets fix n; the timing sweep needs --n free")
    if not sizes or min(sizes) < 1:
        raise InputError(f"Sweep sizes must be positive, got {list(sizes)}")

    reports = []
    for n in sizes:
        data = config.data.model_copy(update={"n": n})
        reports.append(
            run_timing_experiment(config.model_copy(update={"data": data}))
        )
        timings = reports[-1].timings
        logger.info("N=%d: IJ/exact ratio %s", n, timings.ratio)
    return TimingSweep(
        model=reports[0].model,
        family=config.weights.family,
        rows=[report.timings for report in reports],
    )



def run_fit(config: ExperimentConfig) -> FitReport:
    """Fit the base model once."""
    problem = load_problem(config.data, config.run.seed)
    model = problem.model
    base = solve(
        model,
        WeightVector.ones(model.n_points),
        np.zeros(model.dim),
        config.solver,
        threads=config.run.threads,
    )
    grad_norm = base.grad_norm if np.isfinite(base.grad_norm) else None
    return FitReport(
        model=model.kind.value,
        n=model.n_points,
        dim=model.dim,
        theta=base.theta.tolist(),
        grad_norm=grad_norm,
        iterations=base.iterations,
        converged=base.converged,
        status=base.status,
        message=base.message,
        train_loss=(
            held_out_loss(model, base.theta, np.arange(model.n_points))
            if base.converged
            else None
        ),
    )


def run_rate_check(
    config: ExperimentConfig, sizes: Sequence[int]
) -> RateReport:
    """Leave-k-out IJ error rate on synthetic data of increasing size."""
    if config.data.data_path is not None:
        raise InputError("The rate check needs synthetic data, not data_path")

    def factory(n: int, seed: int) -> GlmModel:
        spec = synthetic_spec(config.data, seed).model_copy(update={"n": n})
        return make_model(spec.kind, generate_synthetic(spec))

    return measure_rate(
        factory,
        sizes,
        config.weights.k,
        seed=config.run.seed,
        limit=config.weights.limit,
        opts=config.solver,
        threads=config.run.threads,
    )


def generate_dataset(config: ExperimentConfig) -> Dataset:
    """The synthetic training set the data section describes."""
    return generate_synthetic(synthetic_spec(config.data, config.run.seed))
