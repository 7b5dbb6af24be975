"""
Tests for the ijkit command line.
"""

import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from ijkit.cli import cli, cli_main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def mean_csv(tmp_path: Path) -> Path:
    path = tmp_path / "mean.csv"
    path.write_text("y\n1\n2\n3\n6\n", encoding="utf-8")
    return path


def mean_args(mean_csv: Path, out: Path, *extra: str) -> list[str]:
    return ["--model", "mean", "--data", str(mean_csv), "--out", str(out), *extra]


class TestCommands:
    """Each subcommand on a tiny problem."""

    def test_help(self, runner):
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("fit", "ij-cv", "exact-cv", "bootstrap", "certify"):
            assert command in result.output

    def test_ij_cv_mean_oracle(self, runner, mean_csv, tmp_path):
        out = tmp_path / "run" / "report.json"
        result = runner.invoke(
            cli, ["ij-cv", *mean_args(mean_csv, out, "--compare-exact")]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        fold = report["replications"][0]["records"][3]
        assert fold["theta_ij"] == pytest.approx([2.25])
        assert fold["gap_l2"] == pytest.approx(0.25)
        assert (out.parent / "config.yaml").exists()
        assert "Report written" in result.output

    def test_exact_cv_forces_refits(self, runner, mean_csv, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["exact-cv", *mean_args(mean_csv, out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["command"] == "exact-cv"
        assert report["summary"]["mean_cv_exact"] is not None

    def test_csv_format(self, runner, mean_csv, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(
            cli, ["ij-cv", *mean_args(mean_csv, out, "--format", "csv")]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("weight_id,gap_l2,loss_ij,loss_exact")
        assert len(lines) == 5

    def test_fit(self, runner, mean_csv, tmp_path):
        out = tmp_path / "fit.json"
        result = runner.invoke(cli, ["fit", *mean_args(mean_csv, out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["converged"]
        assert report["theta"] == pytest.approx([3.0])
        assert "Converged" in result.output

    def test_certify(self, runner, mean_csv, tmp_path):
        out = tmp_path / "cert.json"
        result = runner.invoke(
            cli,
            [
                "certify",
                *mean_args(mean_csv, out, "--radius", "0.5", "--n-samples", "2"),
            ],
        )
        assert result.exit_code == 0, result.output
        certificate = json.loads(out.read_text(encoding="utf-8"))["certificate"]
        assert certificate["delta"] == pytest.approx(0.875)
        assert certificate["valid"] is False
        assert "Not certified" in result.output

    def test_bootstrap(self, runner, tmp_path):
        out = tmp_path / "boot.json"
        result = runner.invoke(
            cli,
            [
                "bootstrap",
                "--n", "60",
                "--p", "2",
                "--bootstrap", "5",
                "--test-size", "0",
                "--threads", "1",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["family"] == "bootstrap"
        assert report["n_weights"] == 5

    def test_bench(self, runner, tmp_path):
        out = tmp_path / "bench.json"
        result = runner.invoke(
            cli,
            [
                "bench",
                "--n", "60",
                "--p", "2",
                "--bootstrap", "4",
                "--timing-repeats", "2",
                "--test-size", "0",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["family"] == "bootstrap"
        assert report["timings"]["repeats"] == 2

    def test_bench_size_sweep(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        result = runner.invoke(
            cli,
            [
                "bench",
                "--p", "2",
                "--bootstrap", "4",
                "--timing-repeats", "1",
                "--test-size", "0",
                "--threads", "1",
                "--sizes", "40,80",
                "--format", "csv",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0].split(",")[0] == "n"
        assert [line.split(",")[0] for line in lines[1:]] == ["40", "80"]

    def test_bench_bad_sizes(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["bench", "--sizes", "40,many", "--out", str(tmp_path / "b.json")]
        )
        assert result.exit_code == 2
        assert "--sizes" in result.output

    def test_rate_check(self, runner, tmp_path):
        out = tmp_path / "rate.json"
        result = runner.invoke(
            cli,
            [
                "rate-check",
                "--model", "mean",
                "--sizes", "20,40,80",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["sizes"] == [20, 40, 80]
        assert "log-log slope" in result.output

    def test_gen_data(self, runner, tmp_path):
        out = tmp_path / "data" / "data.csv"
        result = runner.invoke(
            cli, ["gen-data", "--n", "10", "--p", "2", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x1,x2,y"
        assert len(lines) == 11
        assert (out.parent / "config.yaml").exists()


class TestConfigFiles:
    """--config and --generate-config."""

    def test_yaml_config_with_override(self, runner, mean_csv, tmp_path):
        config = tmp_path / "run.yaml"
        out = tmp_path / "report.json"
        config.write_text(
            yaml.safe_dump(
                {
                    "data": {"model": "mean", "data-path": str(mean_csv)},
                    "run": {"compare-exact": True, "out": str(out)},
                }
            ),
            encoding="utf-8",
        )
        result = runner.invoke(
            cli, ["ij-cv", "--config", str(config), "--no-compare-exact"]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["model"] == "mean"
        assert report["replications"][0]["cv_exact"] is None

    def test_yaml_config_values_used(self, runner, mean_csv, tmp_path):
        config = tmp_path / "run.yaml"
        out = tmp_path / "report.json"
        config.write_text(
            yaml.safe_dump(
                {
                    "data": {"model": "mean", "data-path": str(mean_csv)},
                    "run": {"compare-exact": True, "out": str(out)},
                }
            ),
            encoding="utf-8",
        )
        result = runner.invoke(cli, ["ij-cv", "--config", str(config)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["replications"][0]["cv_exact"] is not None

    def test_bad_yaml_field(self, runner, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text("run:\n  speed: 3\n", encoding="utf-8")
        result = runner.invoke(cli, ["ij-cv", "--config", str(config)])
        assert result.exit_code == 2
        assert "Extra inputs are not permitted" in result.output

    def test_generate_config(self, runner, tmp_path):
        with runner.isolated_filesystem(temp_dir=tmp_path):
            result = runner.invoke(cli, ["ij-cv", "--generate-config"])
            assert result.exit_code == 0
            template = Path("experiment_config_template.yaml")
            assert template.exists()
            loaded = yaml.safe_load(template.read_text(encoding="utf-8"))
            assert loaded["solver"]["grad-tol"] == 1e-10


class TestExitCodes:
    """cli_main maps failures onto exit codes."""

    def test_success(self, mean_csv, tmp_path):
        out = tmp_path / "fit.json"
        assert cli_main(["fit", *mean_args(mean_csv, out)]) == 0

    def test_missing_data_file(self, tmp_path):
        code = cli_main(
            [
                "fit",
                "--model", "mean",
                "--data", str(tmp_path / "absent.csv"),
                "--out", str(tmp_path / "fit.json"),
            ]
        )
        assert code == 1

    def test_invalid_value(self, mean_csv, tmp_path):
        args = mean_args(mean_csv, tmp_path / "r.json", "--k", "0")
        assert cli_main(["ij-cv", *args]) == 2

    def test_unknown_option(self):
        assert cli_main(["fit", "--frobnicate"]) == 2

    def test_bad_sizes(self, tmp_path):
        args = ["rate-check", "--sizes", "a,b", "--out", str(tmp_path / "r.json")]
        assert cli_main(args) == 2

    def test_invalid_data_for_model(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n1,0.5\n2,1\n", encoding="utf-8")
        args = ["fit", "--model", "logistic", "--data", str(path)]
        assert cli_main([*args, "--out", str(tmp_path / "f.json")]) == 1

    def test_byte_identical_reruns(self, mean_csv, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for out in (first, second):
            args = mean_args(mean_csv, out, "--compare-exact", "--threads", "1")
            assert cli_main(["exact-cv", *args]) == 0
        assert first.read_bytes() == second.read_bytes()
