"""
Experiment configuration.

An experiment YAML file has one section per concern:

    data:    where the data comes from and which model is fitted
    weights: the weight family
    solver:  SolverOptions
    domain:  certificate domain
    run:     seed, replications, threads and output

Leaf names are unique across sections, so every leaf is also a CLI flag.
"""

from pathlib import Path
from typing import Literal

from pydantic import Field

from ijkit.bounds import DomainConfig
from ijkit.solver import SolverOptions
from ijkit.utils import default_threads
from ijkit.utils.config import BaseConfig
from ijkit.weights import WeightFamily


class DataConfig(BaseConfig):
    """Data source and model."""

    model: Literal["mean", "linear", "logistic", "poisson"] = Field(
        default="logistic",
        description="Model fitted to the data",
    )

    data_path: Path | None = Field(
        default=None,
        alias="data-path",
        description="CSV dataset (x1..xP,y); null generates synthetic data",
    )

    preset: str | None = Field(
        default=None,
        description="Named synthetic preset; fixes model, n, p, feature-scale",
    )

    n: int = Field(default=500, ge=1, description="Synthetic data points")

    p: int = Field(default=5, ge=1, description="Synthetic feature dimension")

    true_bias: float = Field(
        default=0.0, alias="true-bias", description="Synthetic true intercept"
    )

    feature_scale: float = Field(
        default=1.0,
        gt=0,
        alias="feature-scale",
        description="Synthetic feature standard deviation",
    )

    noise_scale: float = Field(
        default=1.0,
        ge=0,
        alias="noise-scale",
        description="Synthetic response noise (mean/linear)",
    )

    bias: bool = Field(default=True, description="Fit an intercept")

    test_size: int = Field(
        default=20000,
        ge=0,
        alias="test-size",
        description="Synthetic test split size (0 disables the test loss)",
    )


class RunConfig(BaseConfig):
    """Seeds, replications, threads and output."""

    seed: int = Field(default=0, ge=0, description="Base random seed")

    repetitions: int = Field(
        default=1, ge=1, description="Replications (seed, seed+1, ...)"
    )

    threads: int = Field(
        default_factory=default_threads,
        ge=1,
        description="Worker threads (default from IJKIT_THREADS)",
    )

    compare_exact: bool = Field(
        default=False,
        alias="compare-exact",
        description="Also run exact warm-started refits for every weight",
    )

    out: Path | None = Field(
        default=None,
        description="Report path (null: runs/<command>_<timestamp>/)",
    )

    format: Literal["json", "csv"] = Field(
        default="json", description="Report file format"
    )

    timing_repeats: int = Field(
        default=5,
        ge=1,
        alias="timing-repeats",
        description="Repetitions of each timed phase (median reported)",
    )

    record_timings: bool = Field(
        default=False,
        alias="record-timings",
        description="Embed wall-clock timings in CV and bootstrap reports",
    )

    progress_bar: bool = Field(
        default=False,
        alias="progress-bar",
        description="Show a TQDM progress bar during exact refits",
    )

    table_log_freq: int = Field(
        default=0,
        ge=0,
        alias="table-log-freq",
        description="Log a refit diagnostics table every N refits (0 disables)",
    )


class ExperimentConfig(BaseConfig):
    """Complete configuration of an ijkit experiment."""

    data: DataConfig = Field(
        default_factory=DataConfig, description="Data and model"
    )
    weights: WeightFamily = Field(
        default_factory=WeightFamily, description="Weight family"
    )
    solver: SolverOptions = Field(
        default_factory=SolverOptions, description="Exact solver"
    )
    domain: DomainConfig = Field(
        default_factory=DomainConfig, description="Certificate domain"
    )
    run: RunConfig = Field(
        default_factory=RunConfig, description="Run settings"
    )
