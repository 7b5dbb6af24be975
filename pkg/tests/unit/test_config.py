"""
Unit tests for BaseConfig and the nested experiment configuration.
"""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from ijkit.harness import ExperimentConfig
from ijkit.solver import SolverOptions
from ijkit.utils.config import format_validation_error


class TestBaseConfig:
    """Validation behaviour shared by every config class."""

    def test_default_values(self):
        options = SolverOptions()
        assert options.grad_tol == 1e-10
        assert options.max_iter == 100
        assert options.hessian_mode == "auto"
        assert options.cg_max_iter is None

    def test_alias_support(self):
        options = SolverOptions(**{"grad-tol": 1e-8, "max-iter": 7})
        assert options.grad_tol == 1e-8
        assert options.max_iter == 7

    def test_type_coercion(self):
        options = SolverOptions(grad_tol="1e-8", max_iter="12")
        assert options.grad_tol == 1e-8
        assert options.max_iter == 12

    def test_extra_fields_forbidden(self):
        with pytest.raises(ValidationError) as exc_info:
            SolverOptions(speed=3)

        errors = exc_info.value.errors()
        assert len(errors) == 1
        assert errors[0]["type"] == "extra_forbidden"

    def test_invalid_literal(self):
        with pytest.raises(ValidationError) as exc_info:
            SolverOptions(hessian_mode="sparse")

        assert "matrix_free" in exc_info.value.errors()[0]["msg"]

    def test_constraint_violation(self):
        with pytest.raises(ValidationError) as exc_info:
            SolverOptions(max_iter=0)

        assert "greater than or equal to 1" in exc_info.value.errors()[0]["msg"]


class TestFlattening:
    """Tests for leaf_names, from_flat and flatten."""

    def test_leaf_names_are_unique(self):
        names = ExperimentConfig.leaf_names()
        assert len(names) == len(set(names))
        assert names[0] == "model"
        for leaf in ("grad_tol", "family", "radius", "compare_exact"):
            assert leaf in names

    def test_from_flat_routes_into_sections(self):
        config = ExperimentConfig.from_flat(
            {"model": "poisson", "grad_tol": 1e-9, "k": 2, "seed": 4}
        )
        assert config.data.model == "poisson"
        assert config.solver.grad_tol == 1e-9
        assert config.weights.k == 2
        assert config.run.seed == 4

    def test_from_flat_rejects_unknown(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_flat({"speed": 3})

    def test_flatten_inverts_from_flat(self):
        config = ExperimentConfig.from_flat({"n": 40, "threads": 2})
        assert ExperimentConfig.from_flat(config.flatten()) == config
        assert set(config.flatten()) == set(ExperimentConfig.leaf_names())


class TestLoadFromYaml:
    """Tests for load_from_yaml."""

    def test_nested_sections(self, tmp_path: Path):
        path = tmp_path / "config.yaml"
        path.write_text(
            "data:\n  model: linear\n  data-path: data.csv\n"
            "solver:\n  max-iter: 20\n",
            encoding="utf-8",
        )
        config = ExperimentConfig.load_from_yaml(path)
        assert config.data.model == "linear"
        assert config.data.data_path == Path("data.csv")
        assert config.solver.max_iter == 20
        assert config.weights.family == "leave_k_out"

    def test_empty_yaml_uses_defaults(self, tmp_path: Path):
        path = tmp_path / "config.yaml"
        path.write_text("", encoding="utf-8")
        assert ExperimentConfig.load_from_yaml(path).data.n == 500

    def test_file_not_found(self, tmp_path: Path):
        with pytest.raises(FileNotFoundError):
            ExperimentConfig.load_from_yaml(tmp_path / "absent.yaml")

    def test_invalid_yaml_syntax(self, tmp_path: Path):
        path = tmp_path / "config.yaml"
        path.write_text("solver: [unclosed", encoding="utf-8")
        with pytest.raises(yaml.YAMLError, match="YAML syntax error"):
            ExperimentConfig.load_from_yaml(path)

    def test_unknown_nested_key(self, tmp_path: Path):
        path = tmp_path / "config.yaml"
        path.write_text("run:\n  speed: 3\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            ExperimentConfig.load_from_yaml(path)


class TestToClickDefaultMap:
    """Tests for to_click_default_map."""

    def test_keys_are_leaf_names(self):
        default_map = ExperimentConfig().to_click_default_map()
        assert set(default_map) == set(ExperimentConfig.leaf_names())
        assert default_map["grad_tol"] == 1e-10

    def test_paths_become_strings(self):
        config = ExperimentConfig.from_flat({"data_path": Path("d.csv")})
        assert config.to_click_default_map()["data_path"] == "d.csv"


class TestGenerateTemplate:
    """Tests for generate_template."""

    def test_template_loads_back(self, tmp_path: Path):
        path = tmp_path / "template.yaml"
        ExperimentConfig.generate_template(path)
        loaded = ExperimentConfig.load_from_yaml(path)
        assert loaded.solver == SolverOptions()

    def test_includes_comments_and_choices(self, tmp_path: Path):
        path = tmp_path / "template.yaml"
        SolverOptions.generate_template(path)
        content = path.read_text(encoding="utf-8")
        assert "# Maximum Newton iterations" in content
        assert "max-iter: 100" in content
        assert "# Valid values: auto, dense, matrix_free" in content

    def test_sections_are_indented(self, tmp_path: Path):
        path = tmp_path / "template.yaml"
        ExperimentConfig.generate_template(path)
        content = path.read_text(encoding="utf-8")
        assert "solver:\n" in content
        assert "  grad-tol: 1.0e-10" in content


class TestToYaml:
    """Tests for to_yaml."""

    def test_round_trip(self, tmp_path: Path):
        config = ExperimentConfig.from_flat(
            {"model": "mean", "data_path": Path("mean.csv"), "k": 2, "threads": 3}
        )
        path = tmp_path / "config.yaml"
        config.to_yaml(path)
        assert ExperimentConfig.load_from_yaml(path) == config

    def test_uses_aliases(self, tmp_path: Path):
        path = tmp_path / "config.yaml"
        SolverOptions(max_iter=9).to_yaml(path)
        assert "max-iter: 9" in path.read_text(encoding="utf-8")


class TestFormatValidationError:
    """Tests for format_validation_error."""

    def test_formats_extra_forbidden(self):
        with pytest.raises(ValidationError) as exc_info:
            ExperimentConfig.model_validate({"run": {"speed": 3}})

        msg = format_validation_error(exc_info.value, "run.yaml", ExperimentConfig)
        assert "Configuration Error in 'run.yaml'" in msg
        assert "run.speed" in msg
        assert "Extra inputs are not permitted" in msg
        assert "Valid fields in 'run': seed, repetitions, threads" in msg

    def test_formats_type_error(self):
        with pytest.raises(ValidationError) as exc_info:
            SolverOptions.model_validate({"max-iter": "many"})

        msg = format_validation_error(exc_info.value, "run.yaml", SolverOptions)
        assert "max-iter" in msg
        assert "Got: 'many'" in msg


class TestShippedConfigs:
    """The example files under configs/ must stay loadable."""

    CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

    @pytest.mark.parametrize(
        "name",
        ["logistic_loo.yaml", "bench_bootstrap.yaml", "poisson_bootstrap.yaml"],
    )
    def test_loads(self, name):
        config = ExperimentConfig.load_from_yaml(self.CONFIG_DIR / name)
        assert config.data.model in ("logistic", "poisson")
