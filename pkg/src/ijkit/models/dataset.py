"""
Datasets of (x_n, y_n) pairs and their CSV representation.

CSV layout: a header row ``x1,...,xP,y``, UTF-8, '.' decimal separator,
floats written with 17 significant digits so that reading the file back
reproduces every value bit for bit.
"""

from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ijkit.errors import InputError

FLOAT_FORMAT = "%.17g"


class Dataset(BaseModel):
    """Feature matrix (N, P), response (N,), and whether to add an intercept."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        extra="forbid",
        frozen=True,
    )

    features: np.ndarray
    response: np.ndarray
    has_bias: bool = True

    @field_validator("features", mode="before")
    @classmethod
    def ensure_matrix(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {arr.shape}")
        arr.flags.writeable = False
        return arr

    @field_validator("response", mode="before")
    @classmethod
    def ensure_vector(cls, v):
        arr = np.array(v, dtype=np.float64).reshape(-1)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def check_consistent(self):
        if self.features.shape[0] != self.response.shape[0]:
            raise ValueError(
                f"features have {self.features.shape[0]} rows but response "
                f"has {self.response.shape[0]} entries"
            )
        if not (
            np.all(np.isfinite(self.features))
            and np.all(np.isfinite(self.response))
        ):
            raise ValueError("dataset contains non-finite values")
        return self

    @property
    def n_points(self) -> int:
        return int(self.response.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def design(self) -> np.ndarray:
        """Features with a trailing constant-1 column when has_bias."""
        if not self.has_bias:
            return np.array(self.features)
        return np.hstack([self.features, np.ones((self.n_points, 1))])

    def subset(self, indices) -> "Dataset":
        """Rows at ``indices`` as a new dataset."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            response=self.response[idx],
            has_bias=self.has_bias,
        )


def write_dataset_csv(dataset: Dataset, path: Path) -> None:
    """
    Write a dataset as ``x1..xP,y`` CSV.

    Args:
        dataset: Dataset to write.
        path: Destination file.
    """
    columns = {
        f"x{j + 1}": dataset.features[:, j] for j in range(dataset.n_features)
    }
    columns["y"] = dataset.response
    frame = pd.DataFrame(columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")


def read_dataset_csv(path: Path, has_bias: bool = True) -> Dataset:
    """
    Read a dataset written by write_dataset_csv (or by hand).

    Args:
        path: CSV file with columns ``x1..xP,y``.
        has_bias: Whether models built on it get an intercept.

    Returns:
        The dataset.

    Raises:
        FileNotFoundError: If the file does not exist.
        InputError: If the header is not ``x1..xP,y`` or values are invalid.
    """
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            float_precision="round_trip",
            encoding="utf-8",
            dtype=np.float64,
        )
    except (ValueError, pd.errors.EmptyDataError) as e:
        raise InputError(f"Cannot read dataset '{path}': {e}") from e
    expected = [f"x{j + 1}" for j in range(frame.shape[1] - 1)] + ["y"]
    if list(frame.columns) != expected:
        raise InputError(
            f"Dataset header must be {','.join(expected)}, got "
            f"{','.join(map(str, frame.columns))}"
        )

    try:
        return Dataset(
            features=frame.iloc[:, :-1].to_numpy(dtype=np.float64).reshape(
                frame.shape[0], frame.shape[1] - 1
            ),
            response=frame["y"].to_numpy(dtype=np.float64),
            has_bias=has_bias,
        )
    except ValueError as e:
        raise InputError(f"Invalid dataset in '{path}': {e}") from e
