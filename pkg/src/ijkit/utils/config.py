"""
Base configuration classes for ijkit.

Every configurable piece of the toolkit (solver options, domain sampling,
weight families, experiment runs) is a pydantic model extending
BaseConfig. Composite configs hold other BaseConfig models as sections;
a YAML file mirrors that nesting while the CLI sees one flat namespace of
leaf options.
"""

from collections.abc import Mapping
from pathlib import Path
from typing import TYPE_CHECKING, Any, get_args, get_origin

import click
import yaml
from pydantic import BaseModel, ConfigDict, ValidationError

if TYPE_CHECKING:
    from typing import Self


def _section_class(annotation: Any) -> type["BaseConfig"] | None:
    if isinstance(annotation, type) and issubclass(annotation, BaseConfig):
        return annotation
    return None


def _yaml_scalar(value: Any) -> str:
    if isinstance(value, Path):
        value = str(value)
    return yaml.safe_dump(value, default_flow_style=True).strip().removesuffix(
        "\n..."
    ).strip()


class BaseConfig(BaseModel):
    """
    Pydantic model shared by every ijkit config.

    Fields use hyphenated aliases in YAML and underscored names in Python;
    unknown keys are rejected. A field whose type is itself a BaseConfig is a
    section: YAML nests it, while the CLI sees its leaves directly, so leaf
    names must be unique across the sections of one root config.

    Example:
        class SolverOptions(BaseConfig):
            grad_tol: float = Field(default=1e-10, gt=0, alias="grad-tol")

        class ExperimentConfig(BaseConfig):
            solver: SolverOptions = Field(default_factory=SolverOptions)
    """

    model_config = ConfigDict(
        populate_by_name=True,
        extra="forbid",
    )

    @classmethod
    def load_from_yaml(cls, path: Path) -> "Self":
        """
        Validate a YAML file against this class.

        An empty file yields the defaults.

        Raises:
            FileNotFoundError: Missing file.
            yaml.YAMLError: Unparsable YAML, message prefixed with the path.
            ValidationError: Unknown keys or invalid values.
        """
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        with open(path, encoding="utf-8") as f:
            try:
                raw = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise yaml.YAMLError(
                    f"YAML syntax error in '{path}': {e}"
                ) from e

        return cls.model_validate(raw)

    @classmethod
    def section_fields(cls) -> dict[str, type["BaseConfig"]]:
        """Fields of this config that are themselves BaseConfig sections."""
        sections = {}
        for name, info in cls.model_fields.items():
            section = _section_class(info.annotation)
            if section is not None:
                sections[name] = section
        return sections

    @classmethod
    def leaf_names(cls) -> list[str]:
        """All leaf field names, sections expanded in declaration order."""
        names: list[str] = []
        sections = cls.section_fields()
        for name in cls.model_fields:
            if name in sections:
                names.extend(sections[name].leaf_names())
            else:
                names.append(name)
        return names

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> "Self":
        """
        Build a (possibly nested) config from flat leaf values.

        Keys are leaf field names; missing keys keep their defaults and
        unknown keys are rejected by validation.

        Args:
            values: Mapping of leaf field name to value.

        Returns:
            Validated configuration instance.
        """
        remaining = dict(values)
        data: dict[str, Any] = {}
        for name, section in cls.section_fields().items():
            leaves = set(section.leaf_names())
            picked = {k: remaining.pop(k) for k in list(remaining) if k in leaves}
            data[name] = section.from_flat(picked)
        data.update(remaining)
        return cls.model_validate(data)

    def flatten(self) -> dict[str, Any]:
        """Leaf field name to value, sections expanded."""
        flat: dict[str, Any] = {}
        sections = self.section_fields()
        for name in type(self).model_fields:
            value = getattr(self, name)
            if name in sections:
                flat.update(value.flatten())
            else:
                flat[name] = value
        return flat

    @classmethod
    def _template_lines(cls, indent: str = "") -> list[str]:
        schema = cls.model_json_schema()
        properties = schema.get("properties", {})
        sections = cls.section_fields()
        lines: list[str] = []

        for field_name, field_info in cls.model_fields.items():
            alias = field_info.alias or field_name
            description = field_info.description or ""

            if description:
                lines.append(f"{indent}# {description}")

            if field_name in sections:
                lines.append(f"{indent}{alias}:")
                lines.extend(sections[field_name]._template_lines(indent + "  "))
                continue

            prop = properties.get(alias, properties.get(field_name, {}))
            if "enum" in prop:
                valid_values = ", ".join(str(v) for v in prop["enum"])
                lines.append(f"{indent}# Valid values: {valid_values}")
            else:
                annotation = field_info.annotation
                if get_origin(annotation) is not None:
                    args = get_args(annotation)
                    if args and all(isinstance(a, str) for a in args):
                        lines.append(f"{indent}# Valid values: {', '.join(args)}")

            default = field_info.get_default(call_default_factory=True)
            lines.append(f"{indent}{alias}: {_yaml_scalar(default)}")
            lines.append("")

        return lines

    @classmethod
    def generate_template(cls, path: Path) -> None:
        """Write every default, with descriptions and choices as comments."""
        lines = [
            f"# {cls.__name__} template (ijkit --generate-config)",
            "# Delete what you do not override; missing keys keep defaults.",
            "",
        ]
        lines.extend(cls._template_lines())
        path.write_text("\n".join(lines), encoding="utf-8")

    def to_click_default_map(self) -> dict[str, Any]:
        """
        Flat leaf values keyed by click parameter name.

        Click looks defaults up by the underscored parameter name, not the
        YAML alias. Paths become strings so click.Path can convert them.
        """
        return {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in self.flatten().items()
        }

    def to_yaml(self, path: Path) -> None:
        """Dump with aliases and in field order; load_from_yaml reads it back."""
        data = self.model_dump(by_alias=True, mode="json")
        path.write_text(
            yaml.safe_dump(data, default_flow_style=False, sort_keys=False),
            encoding="utf-8",
        )


def _section_at(
    config_class: type[BaseConfig], loc: tuple[Any, ...]
) -> tuple[type[BaseConfig], str]:
    """Deepest section named by an error location, and its dotted path."""
    current, path = config_class, []
    for key in loc[:-1]:
        match = next(
            (
                section
                for name, section in current.section_fields().items()
                if key in (name, current.model_fields[name].alias)
            ),
            None,
        )
        if match is None:
            break
        current = match
        path.append(str(key))
    return current, ".".join(path)


def format_validation_error(
    error: ValidationError,
    config_path: str,
    config_class: type[BaseConfig],
) -> str:
    """
    Render a ValidationError as a CLI message.

    Unknown keys are reported with the keys their section does accept, so a
    typo under ``solver:`` lists the solver options rather than the top-level
    sections.

    Args:
        error: Error raised while validating the file.
        config_path: Path shown in the header line.
        config_class: Root config class the file was validated against.

    Returns:
        Multi-line message.
    """
    lines = [f"Configuration Error in '{config_path}':", ""]

    for err in error.errors():
        loc = tuple(err["loc"])
        field = ".".join(str(part) for part in loc)

        if err["type"] == "extra_forbidden":
            section, section_path = _section_at(config_class, loc)
            valid = [
                info.alias or name for name, info in section.model_fields.items()
            ]
            where = f" in '{section_path}'" if section_path else ""
            lines.append(f"  {field}: Extra inputs are not permitted.")
            lines.append(f"         Valid fields{where}: {', '.join(valid)}")
        else:
            lines.append(f"  {field}: {err['msg']}")
            if "input" in err:
                lines.append(f"          Got: {err['input']!r}")

        lines.append("")

    return "\n".join(lines)


def config_option(config_class: type[BaseConfig]):
    """
    ``--config PATH`` for a click command.

    The file is validated against config_class and flattened into
    ctx.default_map, so every leaf in the file becomes the default of the
    option with the same name and explicit flags still win. The option is
    eager and must precede the options it fills.

    Example:
        @click.command()
        @config_option(ExperimentConfig)
        @click.option("--grad-tol", type=float, default=None)
        def fit(grad_tol):
            ...
    """

    def callback(ctx: click.Context, param: click.Parameter, value: str | None):
        if value is None:
            return None

        path = Path(value)
        try:
            config = config_class.load_from_yaml(path)
        except FileNotFoundError as e:
            raise click.BadParameter(
                f"Configuration file not found: {path}"
            ) from e
        except yaml.YAMLError as e:
            raise click.BadParameter(str(e)) from e
        except ValidationError as e:
            raise click.BadParameter(
                format_validation_error(e, str(path), config_class)
            ) from e

        ctx.default_map = {
            **(ctx.default_map or {}),
            **config.to_click_default_map(),
        }
        return value

    return click.option(
        "--config",
        type=click.Path(dir_okay=False),
        callback=callback,
        expose_value=False,
        is_eager=True,
        help="YAML file with data/weights/solver/domain/run sections.",
    )


def generate_config_option(config_class: type[BaseConfig]):
    """
    ``--generate-config`` for a click command.

    Writes ``<name>_config_template.yaml`` (ExperimentConfig gives
    ``experiment_config_template.yaml``) to the working directory with every
    default and description, then exits with status 0.
    """

    def callback(ctx: click.Context, param: click.Parameter, value: bool):
        if not value:
            return

        stem = config_class.__name__.lower().replace("config", "_config")
        output_path = Path(f"{stem}_template.yaml")
        config_class.generate_template(output_path)
        click.echo(f"Wrote configuration template: {output_path}")
        ctx.exit(0)

    return click.option(
        "--generate-config",
        is_flag=True,
        callback=callback,
        expose_value=False,
        is_eager=True,
        help="Write a commented YAML template with all defaults and exit.",
    )
