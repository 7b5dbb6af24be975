"""
Command-line front end.

    ijkit fit       --model logistic --data d.csv --out fit.json
    ijkit ij-cv     --k 1 --compare-exact --data d.csv --model mean
    ijkit bootstrap --bootstrap 200 --preset desk-logistic
    ijkit certify   --family adversarial --compare-exact
    ijkit rate-check --sizes 128,256,512,1024
    ijkit bench     --n 2000 --p 20 --bootstrap 100
    ijkit bench     --sizes 500,1000,2000 --family leave_k_out
    ijkit gen-data  --preset desk-poisson --out data.csv

Every option is a leaf of ExperimentConfig; ``--config run.yaml`` fills
them from a YAML file and explicit flags override it. Exit codes: 0 on
success, 1 on a numeric or I/O failure, 2 on a usage error.
"""

import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import click
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from ijkit.bounds import IJCertificate, RateReport
from ijkit.errors import IJKitError
from ijkit.harness import (
    ExperimentConfig,
    ExperimentReport,
    FitReport,
    TimingSweep,
    emit_report,
    generate_dataset,
    run_accuracy_experiment,
    run_certify_experiment,
    run_fit,
    run_rate_check,
    run_timing_experiment,
    run_timing_sweep,
)
from ijkit.models import list_presets, write_dataset_csv
from ijkit.utils import (
    config_option,
    generate_config_option,
    resolve_output_path,
    save_run_details,
    setup_logging,
)

logger = logging.getLogger(__name__)

console = Console()

Decorator = Callable[[Callable[..., Any]], Callable[..., Any]]

PATH = click.Path(path_type=Path)

DATA_OPTIONS: list[Decorator] = [
    click.option(
        "--model",
        type=click.Choice(["mean", "linear", "logistic", "poisson"]),
        default=None,
        help="Model fitted to the data.",
    ),
    click.option(
        "--data-path",
        "--data",
        "data_path",
        type=PATH,
        default=None,
        help="CSV dataset with header x1..xP,y.",
    ),
    click.option(
        "--preset",
        type=click.Choice(list_presets()),
        default=None,
        help="Named synthetic data preset.",
    ),
    click.option("--n", type=int, default=None, help="Synthetic data points."),
    click.option("--p", type=int, default=None, help="Synthetic features."),
    click.option("--true-bias", type=float, default=None),
    click.option("--feature-scale", type=float, default=None),
    click.option("--noise-scale", type=float, default=None),
    click.option(
        "--bias/--no-bias", default=None, help="Fit an intercept."
    ),
    click.option(
        "--test-size",
        type=int,
        default=None,
        help="Synthetic test split size (0 disables).",
    ),
]

WEIGHT_OPTIONS: list[Decorator] = [
    click.option(
        "--family",
        type=click.Choice(["leave_k_out", "bootstrap", "custom", "adversarial"]),
        default=None,
        help="Weight family.",
    ),
    click.option("--k", type=int, default=None, help="Points left out."),
    click.option(
        "--bootstrap",
        type=int,
        default=None,
        help="Number of bootstrap weight vectors.",
    ),
    click.option(
        "--limit",
        type=int,
        default=None,
        help="Sample this many leave-k-out vectors.",
    ),
    click.option(
        "--weights-path",
        type=PATH,
        default=None,
        help="CSV of custom weight vectors.",
    ),
]

SOLVER_OPTIONS: list[Decorator] = [
    click.option("--grad-tol", type=float, default=None),
    click.option("--max-iter", type=int, default=None),
    click.option("--initial-damping", type=float, default=None),
    click.option("--max-damping-increases", type=int, default=None),
    click.option("--min-hessian-eig", type=float, default=None),
    click.option(
        "--hessian-mode",
        type=click.Choice(["auto", "dense", "matrix_free"]),
        default=None,
    ),
    click.option("--dense-cutoff", type=int, default=None),
    click.option("--cg-tol", type=float, default=None),
    click.option("--cg-max-iter", type=int, default=None),
]

DOMAIN_OPTIONS: list[Decorator] = [
    click.option(
        "--radius",
        type=float,
        default=None,
        help="Certificate domain radius (default: automatic).",
    ),
    click.option("--n-samples", type=int, default=None),
    click.option("--min-radius", type=float, default=None),
]

RUN_OPTIONS: list[Decorator] = [
    click.option("--seed", type=int, default=None, help="Base random seed."),
    click.option("--repetitions", type=int, default=None),
    click.option("--threads", type=int, default=None),
    click.option(
        "--compare-exact/--no-compare-exact",
        default=None,
        help="Also run exact refits for every weight vector.",
    ),
    click.option(
        "--out",
        type=PATH,
        default=None,
        help="Output file (default: runs/<command>_<timestamp>/).",
    ),
    click.option(
        "--format",
        "format",
        type=click.Choice(["json", "csv"]),
        default=None,
        help="Report format.",
    ),
    click.option("--timing-repeats", type=int, default=None),
    click.option("--record-timings/--no-record-timings", default=None),
    click.option("--progress-bar/--no-progress-bar", default=None),
    click.option("--table-log-freq", type=int, default=None),
]


def options(*groups: Sequence[Decorator]) -> Decorator:
    """Apply option groups, plus --config and --generate-config."""

    def decorate(fn: Callable[..., Any]) -> Callable[..., Any]:
        for group in reversed(groups):
            for option in reversed(group):
                fn = option(fn)
        fn = generate_config_option(ExperimentConfig)(fn)
        return config_option(ExperimentConfig)(fn)

    return decorate


EXPERIMENT_OPTIONS = (DATA_OPTIONS, WEIGHT_OPTIONS, SOLVER_OPTIONS, RUN_OPTIONS)


def build_config(
    values: dict[str, Any],
    defaults: dict[str, Any] | None = None,
    forced: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """
    ExperimentConfig from parsed leaf options.

    Unset options (None) fall back to ``defaults`` and then to the config
    defaults; ``forced`` values always win.

    Raises:
        click.UsageError: The values do not validate.
    """
    flat = {**(defaults or {})}
    flat.update({k: v for k, v in values.items() if v is not None})
    flat.update(forced or {})
    try:
        return ExperimentConfig.from_flat(flat)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(map(str, err['loc']))}: {err['msg']}"
            for err in e.errors()
        )
        raise click.UsageError(f"Invalid options: {problems}") from e


def write_report(
    report: ExperimentReport | FitReport | RateReport | IJCertificate | TimingSweep,
    config: ExperimentConfig,
    command: str,
) -> Path:
    fmt = config.run.format
    path = resolve_output_path(config.run.out, command, f"report.{fmt}")
    emit_report(report, path, fmt)
    save_run_details(path, config, quiet=True)
    console.print(f"[green]Report written to {path}[/green]")
    return path


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


def print_experiment(report: ExperimentReport) -> None:
    summary = report.summary
    table = Table(title=f"{report.command}: {report.model} / {report.family}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("weight vectors", str(report.n_weights))
    table.add_row("replications", str(summary.replications))
    table.add_row("train loss", _fmt(summary.mean_train_loss))
    table.add_row("CV (IJ)", _fmt(summary.mean_cv_ij))
    table.add_row("CV (exact)", _fmt(summary.mean_cv_exact))
    table.add_row("test loss", _fmt(summary.mean_test_loss))
    table.add_row("max ‖θ_IJ − θ‖₂", _fmt(summary.max_gap_l2))
    if report.timings is not None:
        timings = report.timings
        table.add_row("IJ total [s]", _fmt(timings.ij_total))
        table.add_row("exact total [s]", _fmt(timings.exact_total))
        table.add_row("IJ / exact", _fmt(timings.ratio))
    console.print(table)

    for replication in report.replications:
        if replication.failed_refits:
            console.print(
                f"[yellow]Replication {replication.replication}: "
                f"{replication.failed_refits} refits did not converge[/yellow]"
            )


def print_certificate(certificate: IJCertificate) -> None:
    table = Table(title="IJ error certificate")
    table.add_column("Constant", style="cyan")
    table.add_column("Value", justify="right")
    for name in (
        "c_g",
        "c_h",
        "c_op",
        "l_h",
        "c_w",
        "c_ij",
        "delta",
        "delta_cap",
        "bound",
        "measured_error",
    ):
        table.add_row(name, _fmt(getattr(certificate, name)))
    console.print(table)
    if certificate.valid:
        console.print(
            f"[green]Certified: error ≤ {certificate.bound:.3e}[/green]"
        )
    else:
        console.print(
            f"[yellow]Not certified: δ={certificate.delta:.3e} exceeds "
            f"Δ_δ={certificate.delta_cap:.3e}[/yellow]"
        )
    if certificate.sound is False:
        console.print("[red]Measured error exceeds the bound[/red]")


def parse_sizes(sizes: str) -> list[int]:
    try:
        return [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError as e:
        raise click.BadParameter(
            f"expected comma-separated integers, got '{sizes}'",
            param_hint="--sizes",
        ) from e


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]),
    default="WARNING",
    help="Logging level.",
)
@click.option("--log-file", type=str, default=None, help="Also log to file.")
def cli(log_level: str, log_file: str | None) -> None:
    """Infinitesimal jackknife approximations for weighted M-estimators."""
    setup_logging(log_file, log_level)


@cli.command()
@options(DATA_OPTIONS, SOLVER_OPTIONS, RUN_OPTIONS)
def fit(**values: Any) -> None:
    """Fit the model at unit weights."""
    config = build_config(values)
    report = run_fit(config)
    table = Table(title=f"fit: {report.model}")
    table.add_column("j", justify="right")
    table.add_column("θ_j", justify="right")
    for j, value in enumerate(report.theta, start=1):
        table.add_row(str(j), f"{value:.10g}")
    console.print(table)
    if report.converged:
        console.print(
            f"[green]Converged in {report.iterations} iterations, "
            f"|G|={_fmt(report.grad_norm)}[/green]"
        )
    else:
        console.print(
            f"[yellow]Did not converge ({report.status}): "
            f"{report.message}[/yellow]"
        )
    write_report(report, config, "fit")


@cli.command("ij-cv")
@options(*EXPERIMENT_OPTIONS)
def ij_cv(**values: Any) -> None:
    """Approximate cross-validation with the IJ."""
    config = build_config(values)
    report = run_accuracy_experiment(config, "ij-cv")
    print_experiment(report)
    write_report(report, config, "ij-cv")


@cli.command("exact-cv")
@options(*EXPERIMENT_OPTIONS)
def exact_cv(**values: Any) -> None:
    """Cross-validation with IJ predictions and exact refits side by side."""
    config = build_config(values, forced={"compare_exact": True})
    report = run_accuracy_experiment(config, "exact-cv")
    print_experiment(report)
    write_report(report, config, "exact-cv")


@cli.command()
@options(*EXPERIMENT_OPTIONS)
def bootstrap(**values: Any) -> None:
    """IJ bootstrap: per-coordinate spread and IJ standard errors."""
    config = build_config(values, forced={"family": "bootstrap"})
    report = run_accuracy_experiment(config, "bootstrap")
    print_experiment(report)
    summary = report.replications[0].bootstrap
    if summary is not None:
        table = Table(title="Bootstrap standard deviations")
        table.add_column("j", justify="right")
        table.add_column("IJ", justify="right")
        table.add_column("exact", justify="right")
        table.add_column("IJ s.e.", justify="right")
        exact = summary.std_exact or [None] * len(summary.std_ij)
        for j, row in enumerate(
            zip(summary.std_ij, exact, summary.ij_standard_errors, strict=True),
            start=1,
        ):
            table.add_row(str(j), *map(_fmt, row))
        console.print(table)
    write_report(report, config, "bootstrap")


@cli.command()
@options(*EXPERIMENT_OPTIONS, DOMAIN_OPTIONS)
def certify(**values: Any) -> None:
    """Certify the IJ error over the weight family."""
    config = build_config(values)
    report = run_certify_experiment(config)
    if report.certificate is not None:
        print_certificate(report.certificate)
    write_report(report, config, "certify")


@cli.command("rate-check")
@options(*EXPERIMENT_OPTIONS)
@click.option(
    "--sizes",
    type=str,
    default="128,256,512,1024",
    show_default=True,
    help="Comma-separated increasing problem sizes.",
)
def rate_check(sizes: str, **values: Any) -> None:
    """Log-log slope of the leave-k-out IJ error against N."""
    config = build_config(values)
    report = run_rate_check(config, parse_sizes(sizes))
    table = Table(title=f"IJ error rate (k={report.k})")
    table.add_column("N", justify="right")
    table.add_column("max error", justify="right")
    for n, error in zip(report.sizes, report.errors, strict=True):
        table.add_row(str(n), f"{error:.3e}")
    console.print(table)
    console.print(f"log-log slope: [bold]{report.slope:.3f}[/bold]")
    write_report(report, config, "rate-check")


@cli.command()
@options(*EXPERIMENT_OPTIONS)
@click.option(
    "--sizes",
    type=str,
    default=None,
    help="Comma-separated N values; one timing row per size.",
)
def bench(sizes: str | None, **values: Any) -> None:
    """Wall-clock time of IJ predictions against exact refits."""
    config = build_config(values, defaults={"family": "bootstrap"})
    if sizes is None:
        report = run_timing_experiment(config)
        print_experiment(report)
        write_report(report, config, "bench")
        return

    sweep = run_timing_sweep(config, parse_sizes(sizes))
    table = Table(title=f"bench: {sweep.model} / {sweep.family}")
    table.add_column("N", justify="right")
    table.add_column("IJ total [s]", justify="right")
    table.add_column("exact total [s]", justify="right")
    table.add_column("IJ / exact", justify="right")
    for row in sweep.rows:
        table.add_row(
            str(row.n), _fmt(row.ij_total), _fmt(row.exact_total), _fmt(row.ratio)
        )
    console.print(table)
    write_report(sweep, config, "bench")


@cli.command("gen-data")
@options(DATA_OPTIONS, RUN_OPTIONS)
def gen_data(**values: Any) -> None:
    """Write a synthetic dataset as CSV."""
    config = build_config(values)
    path = resolve_output_path(config.run.out, "gen-data", "data.csv")
    dataset = generate_dataset(config)
    write_dataset_csv(dataset, path)
    save_run_details(path, config, quiet=True)
    console.print(
        f"[green]Wrote {dataset.n_points} rows x {dataset.n_features} "
        f"features to {path}[/green]"
    )


def cli_main(argv: Sequence[str] | None = None) -> int:
    """
    Run the CLI and return its exit code instead of exiting.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:]).

    Returns:
        0 on success, 1 on numeric or I/O errors, 2 on usage errors.
    """
    try:
        rv = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="ijkit",
            standalone_mode=False,
        )
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        console.print("[red]Aborted[/red]")
        return 1
    except (IJKitError, OSError) as e:
        console.print(f"[red]Error: {e}[/red]")
        logger.debug("Command failed", exc_info=True)
        return 1
    return rv if isinstance(rv, int) else 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
