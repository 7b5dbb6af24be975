from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import rich

if TYPE_CHECKING:
    from ijkit.utils.config import BaseConfig

BASE_DIR = "runs"


def resolve_output_path(
    out: Path | None, name: str, filename: str = "report.json"
) -> Path:
    """
    Pick where a command writes its main output.

    Args:
        out: Explicit output path, used as is when given.
        name: Command name used in the run folder prefix.
        filename: File name inside a freshly created run folder.

    Returns:
        Output path whose parent folder exists.
    """
    if out is None:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        out = Path(BASE_DIR) / f"{name}_{timestamp}" / filename

    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def save_run_details(
    output_path: Path,
    config: Optional["BaseConfig"] = None,
    quiet: bool = False,
) -> Path | None:
    """
    Save the configuration of a run next to its output.

    Args:
        output_path: Path of the report or certificate just written.
        config: Config to save for reproducibility.
        quiet: Skip the console notice.

    Returns:
        Path of the saved config.yaml, or None when no config was given.
    """
    if config is None:
        return None

    config_path = output_path.parent / "config.yaml"
    config.to_yaml(config_path)

    if not quiet:
        rich.print(
            f"[green]Run details saved in folder: {output_path.parent}[/green]"
        )
    return config_path


def load_config_from_run(
    run_path: str | Path,
    config_class: type["BaseConfig"],
) -> Optional["BaseConfig"]:
    """
    Load configuration from a saved run.

    Args:
        run_path: Path to run folder or to a report file inside it.
        config_class: The config class to use for validation.

    Returns:
        Loaded config if config.yaml exists, None otherwise.
    """
    folder = Path(run_path)
    if folder.is_file():
        folder = folder.parent

    config_path = folder / "config.yaml"
    if config_path.exists():
        return config_class.load_from_yaml(config_path)
    return None
