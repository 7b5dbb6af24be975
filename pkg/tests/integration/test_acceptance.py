"""
End-to-end checks at desk scale.

Run with ``pytest -m slow``; each class takes seconds to a few minutes.
"""

import warnings

import numpy as np
import pytest

from ijkit.bounds import (
    DomainSpec,
    certify,
    check_holder,
    check_opnorm_continuity,
    measure_rate,
)
from ijkit.core import WeightVector, eval_G, finite_diff_check
from ijkit.errors import SingularityError
from ijkit.harness import (
    ExperimentConfig,
    emit_report,
    run_accuracy_experiment,
    run_certify_experiment,
    run_fit,
    run_timing_experiment,
)
from ijkit.ij import build_handle, ij_predict, integrated_hessian
from ijkit.models import Dataset, make_model, plug_in_two_stage, two_stage_mean
from ijkit.solver import solve, warm_start_batch
from ijkit.weights import adversarial, leave_k_out

pytestmark = pytest.mark.slow

SEEDS = range(10)


def stacked_model(seed: int):
    """Linear first stage feeding a Poisson second stage."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 2))
    first = make_model("linear", Dataset(features=x, response=x @ [0.5, -0.2]))
    second = Dataset(
        features=0.5 * rng.standard_normal((40, 1)),
        response=rng.poisson(1.0, size=40).astype(float),
    )
    return plug_in_two_stage(first, "poisson", second)


class TestDerivatives:
    """Analytic h_n against central differences at random parameters."""

    @pytest.mark.parametrize("kind", ["linear", "logistic", "poisson"])
    @pytest.mark.parametrize("seed", SEEDS)
    def test_glm(self, make_synthetic, kind, seed):
        model = make_synthetic(kind, 50, 3, seed)
        theta = 0.3 * np.random.default_rng(seed).standard_normal(model.dim)
        assert finite_diff_check(model, theta) <= 1e-6

    @pytest.mark.parametrize("seed", SEEDS)
    def test_mean(self, seed):
        rng = np.random.default_rng(seed)
        model = make_model(
            "mean",
            Dataset(features=np.zeros((30, 0)), response=rng.standard_normal(30)),
        )
        assert finite_diff_check(model, rng.standard_normal(1)) <= 1e-6

    @pytest.mark.parametrize("seed", SEEDS)
    def test_stacked(self, seed):
        eq = stacked_model(seed)
        theta = 0.3 * np.random.default_rng(100 + seed).standard_normal(eq.dim)
        assert finite_diff_check(eq, theta) <= 1e-6

    @pytest.mark.parametrize("seed", SEEDS)
    def test_two_stage_mean(self, seed):
        rng = np.random.default_rng(seed)
        eq = two_stage_mean(rng.standard_normal(20), rng.standard_normal(20))
        assert finite_diff_check(eq, rng.standard_normal(2)) <= 1e-6


class TestClosedForms:
    """Exact agreement with known answers."""

    def test_mean_leave_out_outlier(self, mean_model, fit_ones):
        base = fit_ones(mean_model)
        handle, cache = build_handle(mean_model, base)
        w = WeightVector.from_sparse(4, {3: 0.0})
        theta_ij = ij_predict(handle, cache, w)
        (fit,) = warm_start_batch(mean_model, [w], base)
        assert abs(theta_ij[0] - 2.25) <= 1e-12
        assert abs(fit.theta[0] - 2.0) <= 1e-12
        assert abs(np.linalg.norm(theta_ij - fit.theta) - 0.25) <= 1e-12

    def test_linear_sherman_morrison(self, make_synthetic, fit_ones):
        model = make_synthetic("linear", 200, 10, 7)
        base = fit_ones(model)
        x, y = model.design, model.response
        xtx_inv = np.linalg.inv(x.T @ x)
        residual = y - x @ base.theta
        weights = list(leave_k_out(model.n_points, 1))
        fits = warm_start_batch(model, weights, base)
        for w, fit in zip(weights, fits, strict=True):
            (n,) = w.zero_indices()
            leverage = x[n] @ xtx_inv @ x[n]
            expected = base.theta - xtx_inv @ x[n] * residual[n] / (1 - leverage)
            np.testing.assert_allclose(fit.theta, expected, rtol=1e-8, atol=1e-10)


class TestCertificateSoundness:
    """A valid certificate never undercuts the measured leave-one-out error."""

    @pytest.mark.parametrize("seed", range(20))
    def test_logistic_leave_one_out(self, seed):
        config = ExperimentConfig.from_flat(
            {
                "model": "logistic",
                "n": 500,
                "p": 5,
                "test_size": 0,
                "seed": seed,
                "compare_exact": True,
                "threads": 1,
            }
        )
        cert = run_certify_experiment(config).certificate
        assert cert is not None
        assert cert.measured_error is not None
        if cert.valid:
            assert cert.measured_error <= cert.bound

    def test_large_sample_certificate_is_valid_and_sound(self):
        """At N = 20000 the bound applies and holds for every seed it applies to."""
        certificates = []
        for seed in range(3):
            config = ExperimentConfig.from_flat(
                {
                    "model": "logistic",
                    "n": 20000,
                    "p": 1,
                    "test_size": 0,
                    "limit": 30,
                    "radius": 0.05,
                    "seed": seed,
                    "compare_exact": True,
                    "threads": 1,
                }
            )
            certificates.append(run_certify_experiment(config).certificate)

        valid = [cert for cert in certificates if cert.valid]
        assert valid
        for cert in valid:
            assert cert.sound
            assert cert.measured_error <= cert.bound


class TestRates:
    """Leave-one-out error shrinks at the predicted rate."""

    def test_logistic_slope(self, make_synthetic):
        def factory(n: int, seed: int):
            return make_synthetic("logistic", n, 5, seed)

        slopes = [
            measure_rate(factory, [128, 256, 512, 1024], k=1, seed=seed).slope
            for seed in range(5)
        ]
        assert np.mean(slopes) <= -0.9

    def test_mean_slope(self):
        def factory(n: int, seed: int):
            data = Dataset(
                features=np.zeros((n, 0)), response=np.linspace(0.0, 1.0, n)
            )
            return make_model("mean", data)

        report = measure_rate(factory, [128, 256, 512, 1024], k=1)
        assert report.slope == pytest.approx(-2.0, abs=0.15)


class TestAccuracy:
    """IJ cross-validation tracks exact cross-validation."""

    def test_logistic_replications(self):
        config = ExperimentConfig.from_flat(
            {
                "model": "logistic",
                "n": 500,
                "p": 20,
                "test_size": 0,
                "repetitions": 20,
                "compare_exact": True,
                "threads": 1,
            }
        )
        summary = run_accuracy_experiment(config).summary
        assert summary.frac_ij_closer_than_train >= 0.9
        if summary.frac_ij_underestimates < 0.7:
            warnings.warn(
                f"CV_IJ <= CV_exact in only {summary.frac_ij_underestimates:.0%}"
                " of replications",
                stacklevel=1,
            )


class TestTiming:
    """The IJ path is much cheaper than warm-started refits."""

    def test_bootstrap_bench(self):
        config = ExperimentConfig.from_flat(
            {
                "model": "logistic",
                "n": 2000,
                "p": 20,
                "test_size": 0,
                "family": "bootstrap",
                "bootstrap": 100,
                "timing_repeats": 5,
                "threads": 1,
            }
        )
        timings = run_timing_experiment(config).timings
        assert timings.ratio is not None
        assert timings.ratio <= 0.2


class TestInequalities:
    """Randomised trials of the bound's matrix inequalities."""

    def test_holder_trials(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n, size = rng.integers(1, 50), rng.integers(1, 5)
            w = WeightVector.from_dense(rng.standard_normal(n) * rng.exponential())
            assert check_holder(w, rng.standard_normal((n, size, size)))

    def test_opnorm_trials(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            dim = int(rng.integers(1, 6))
            a = rng.standard_normal((dim, dim)) + dim * np.eye(dim)
            c_op = 1.0 / np.linalg.svd(a, compute_uv=False)[-1]
            perturbation = rng.standard_normal((dim, dim))
            perturbation *= 2.0 * rng.random() / (c_op * np.abs(perturbation).sum())
            assert check_opnorm_continuity(a, a + perturbation, c_op)

    @pytest.mark.parametrize("seed", range(20))
    def test_integrated_hessian_identity(self, make_synthetic, seed):
        model = make_synthetic("logistic", 100, 3, seed)
        rng = np.random.default_rng(seed)
        base_theta = 0.5 * rng.standard_normal(model.dim)
        theta = base_theta + 0.1 * rng.standard_normal(model.dim)
        w = WeightVector.from_dense(rng.poisson(1.0, size=model.n_points))
        h_tilde = integrated_hessian(model, base_theta, theta, w)
        lhs = eval_G(model, theta, w) - eval_G(model, base_theta, w)
        np.testing.assert_allclose(
            lhs, h_tilde @ (theta - base_theta), rtol=1e-6, atol=1e-6
        )


class TestDegenerateInputs:
    """Failure modes are reported, not crashed into."""

    def test_rank_deficient_design(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((30, 1))
        model = make_model(
            "linear",
            Dataset(features=np.hstack([x, x]), response=rng.standard_normal(30)),
        )
        with pytest.raises(SingularityError):
            solve(model, WeightVector.ones(30), np.zeros(model.dim))

    def test_separable_logistic_reports(self, tmp_path):
        path = tmp_path / "separable.csv"
        path.write_text("x1,y\n-2,0\n-1,0\n1,1\n2,1\n", encoding="utf-8")
        config = ExperimentConfig.from_flat(
            {"model": "logistic", "data_path": path, "bias": False}
        )
        report = run_fit(config)
        assert not report.converged
        assert report.status in ("diverging", "max_iter", "stalled")
        assert report.train_loss is None

    def test_adversarial_outlier_not_certified(self, make_synthetic, fit_ones):
        model = make_synthetic("linear", 200, 3, 11)
        response = model.response.copy()
        response[17] += 100.0
        model = make_model(
            "linear", Dataset(features=model.dataset.features, response=response)
        )
        base = fit_ones(model)
        handle, cache = build_handle(model, base)
        w = adversarial(cache)
        assert w.dense()[17] == model.n_points
        domain = DomainSpec(center=base.theta, radius=0.1, n_samples=8)
        assert not certify(model, base, domain, [w]).valid


class TestDeterminism:
    """Single-thread reruns produce identical bytes."""

    @pytest.mark.parametrize("family", ["leave_k_out", "bootstrap"])
    def test_report_bytes(self, tmp_path, family):
        config = ExperimentConfig.from_flat(
            {
                "model": "poisson",
                "n": 150,
                "p": 3,
                "test_size": 100,
                "family": family,
                "bootstrap": 20,
                "repetitions": 2,
                "compare_exact": True,
                "seed": 3,
                "threads": 1,
            }
        )
        first = emit_report(run_accuracy_experiment(config), tmp_path / "a.json")
        second = emit_report(run_accuracy_experiment(config), tmp_path / "b.json")
        assert first.read_bytes() == second.read_bytes()
