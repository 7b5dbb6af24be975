"""
Experiment reports and their JSON / CSV representation.

Reports are plain pydantic models. JSON output is the full nested
document; CSV output is one row per weight record with a stable column
order led by ``weight_id,gap_l2,loss_ij,loss_exact``. Missing values are
null in JSON and empty in CSV.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ijkit.bounds import IJCertificate, RateReport
from ijkit.errors import InputError
from ijkit.models.dataset import FLOAT_FORMAT

logger = logging.getLogger(__name__)

CSV_LEAD_COLUMNS = ["weight_id", "gap_l2", "loss_ij", "loss_exact"]


class WeightRecord(BaseModel):
    """Results for one weight vector."""

    model_config = ConfigDict(frozen=True)

    weight_id: int
    replication: int = 0
    support_size: int
    held_out: int = Field(description="Number of points the losses average")
    theta_ij: list[float]
    theta_exact: list[float] | None = None
    gap_l2: float | None = None
    loss_ij: float
    loss_exact: float | None = None
    converged: bool | None = None
    status: str | None = None


class BootstrapSummary(BaseModel):
    """Per-coordinate spread of bootstrap estimates."""

    model_config = ConfigDict(frozen=True)

    std_ij: list[float]
    std_exact: list[float] | None = None
    ij_standard_errors: list[float]


class ReplicationResult(BaseModel):
    """One replication: base fit, CV estimates and per-weight records."""

    model_config = ConfigDict(frozen=True)

    replication: int
    seed: int
    n: int
    dim: int
    theta_hat: list[float]
    base_grad_norm: float
    base_iterations: int
    train_loss: float
    cv_ij: float
    cv_exact: float | None = None
    test_loss: float | None = None
    failed_refits: int = 0
    records: list[WeightRecord]
    bootstrap: BootstrapSummary | None = None


class Timings(BaseModel):
    """Median wall-clock seconds per phase; IJ and exact totals."""

    model_config = ConfigDict(frozen=True)

    repeats: int
    n: int | None = Field(default=None, description="Data points timed")
    base_fit: float = Field(ge=0)
    build_handle: float = Field(ge=0)
    ij_batch: float = Field(ge=0)
    exact_batch: float | None = Field(default=None, ge=0)
    ij_total: float = Field(ge=0)
    exact_total: float | None = Field(default=None, ge=0)
    ratio: float | None = Field(
        default=None, description="ij_total / exact_total"
    )


class TimingSweep(BaseModel):
    """IJ against exact refit timings, one row per problem size."""

    model_config = ConfigDict(frozen=True)

    command: str = "bench"
    model: str
    family: str
    rows: list[Timings]


class ExperimentSummary(BaseModel):
    """Aggregates across replications."""

    model_config = ConfigDict(frozen=True)

    replications: int
    mean_train_loss: float
    mean_cv_ij: float
    mean_cv_exact: float | None = None
    mean_test_loss: float | None = None
    frac_ij_closer_than_train: float | None = Field(
        default=None,
        description="Share with |CV_IJ - CV_exact| < |CV_exact - train loss|",
    )
    frac_ij_underestimates: float | None = Field(
        default=None, description="Share with CV_IJ <= CV_exact"
    )
    max_gap_l2: float | None = None


class ExperimentReport(BaseModel):
    """Everything a cv / bootstrap / certify / bench run produced."""

    model_config = ConfigDict(frozen=True)

    command: str
    model: str
    family: str
    n_weights: int
    replications: list[ReplicationResult]
    summary: ExperimentSummary
    timings: Timings | None = None
    certificate: IJCertificate | None = None


class FitReport(BaseModel):
    """Result of a single base fit."""

    model_config = ConfigDict(frozen=True)

    model: str
    n: int
    dim: int
    theta: list[float]
    grad_norm: float | None
    iterations: int
    converged: bool
    status: str
    message: str = ""
    train_loss: float | None = None


AnyReport = (
    ExperimentReport | FitReport | RateReport | IJCertificate | TimingSweep
)


def report_frame(report: ExperimentReport) -> pd.DataFrame:
    """Per-weight records as a DataFrame in the CSV column order."""
    rows = []
    for replication in report.replications:
        for record in replication.records:
            row = {
                "weight_id": record.weight_id,
                "gap_l2": record.gap_l2,
                "loss_ij": record.loss_ij,
                "loss_exact": record.loss_exact,
                "replication": record.replication,
                "support_size": record.support_size,
                "held_out": record.held_out,
                "converged": record.converged,
            }
            for j, value in enumerate(record.theta_ij):
                row[f"theta_ij_{j + 1}"] = value
            for j, value in enumerate(record.theta_exact or []):
                row[f"theta_exact_{j + 1}"] = value
            rows.append(row)
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=CSV_LEAD_COLUMNS)
    return frame


def timing_frame(sweep: TimingSweep) -> pd.DataFrame:
    """One row per size, led by n."""
    if not sweep.rows:
        return pd.DataFrame(columns=["n"])
    frame = pd.DataFrame([row.model_dump() for row in sweep.rows])
    return frame[["n", *(c for c in frame.columns if c != "n")]]


def _csv_frame(report: AnyReport) -> pd.DataFrame:
    if isinstance(report, ExperimentReport):
        return report_frame(report)
    if isinstance(report, TimingSweep):
        return timing_frame(report)
    raise InputError(
        f"CSV output needs per-weight or per-size rows; "
        f"{type(report).__name__} has none"
    )


def emit_report(
    report: AnyReport,
    path: Path,
    format: Literal["json", "csv"] = "json",
) -> Path:
    """
    Write a report.

    Args:
        report: Report to write.
        path: Destination file.
        format: ``json`` for the nested document, ``csv`` for one row per
            weight record or, for a timing sweep, per size.

    Returns:
        The written path.

    Raises:
        OSError: If the path is not writable.
        InputError: CSV requested for a report without rows.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "json":
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    elif format == "csv":
        _csv_frame(report).to_csv(
            path,
            index=False,
            float_format=FLOAT_FORMAT,
            encoding="utf-8",
            lineterminator="\n",
        )
    else:
        raise InputError(f"Unknown report format: {format}")
    logger.info("Wrote %s report to %s", format, path)
    return path


def load_report(path: Path) -> ExperimentReport:
    """Parse a JSON experiment report."""
    return ExperimentReport.model_validate_json(path.read_text(encoding="utf-8"))
