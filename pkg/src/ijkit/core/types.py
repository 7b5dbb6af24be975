"""
Parameter and weight-vector types.

A parameter is a plain float64 numpy vector validated by ``as_parameter``.
A WeightVector stores only the entries that differ from one, since
leave-k-out and most re-weightings touch few data points; the dense form
is materialised on demand and cached.
"""

from __future__ import annotations

from collections.abc import Mapping
from functools import cached_property

import numpy as np
import numpy.typing as npt

from ijkit.errors import InputError

Parameter = npt.NDArray[np.float64]


def as_parameter(values: npt.ArrayLike, dim: int | None = None) -> Parameter:
    """
    Validate and convert parameter values.

    Args:
        values: Anything convertible to a 1-D float vector.
        dim: Expected length, checked when given.

    Returns:
        A fresh float64 vector.

    Raises:
        InputError: On wrong shape, wrong length or non-finite entries.
    """
    theta = np.array(values, dtype=np.float64)
    if theta.ndim == 0:
        theta = theta.reshape(1)
    if theta.ndim != 1:
        raise InputError(f"Parameter must be a vector, got shape {theta.shape}")
    if dim is not None and theta.shape[0] != dim:
        raise InputError(
            f"Parameter has length {theta.shape[0]}, equation expects {dim}"
        )
    if not np.all(np.isfinite(theta)):
        raise InputError(f"Parameter has non-finite entries: {theta.tolist()}")
    return theta


class WeightVector:
    """
    Per-datum weights w of length N with implicit default 1.0.

    Example:
        w = WeightVector.from_sparse(4, {3: 0.0})   # leave out datum 3
        w.dense()                                   # array([1., 1., 1., 0.])
        w.delta_support()                           # (array([3]), array([-1.]))
    """

    def __init__(
        self,
        n: int,
        indices: npt.ArrayLike = (),
        values: npt.ArrayLike = (),
    ) -> None:
        if n < 0:
            raise InputError(f"Weight vector length must be >= 0, got {n}")
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        vals = np.asarray(values, dtype=np.float64).reshape(-1)
        if idx.shape != vals.shape:
            raise InputError("Sparse weight indices and values differ in length")
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise InputError(f"Weight index out of range for N={n}")
        if not np.all(np.isfinite(vals)):
            raise InputError("Weights must be finite")

        order = np.argsort(idx, kind="stable")
        idx, vals = idx[order], vals[order]
        if idx.size > 1 and np.any(np.diff(idx) == 0):
            raise InputError("Duplicate weight indices")

        keep = vals != 1.0
        self.n = int(n)
        self._indices = idx[keep]
        self._values = vals[keep]
        self._indices.flags.writeable = False
        self._values.flags.writeable = False

    @classmethod
    def ones(cls, n: int) -> WeightVector:
        """The all-ones weight vector 1_w."""
        return cls(n)

    @classmethod
    def from_dense(cls, weights: npt.ArrayLike) -> WeightVector:
        """Build from a dense length-N array."""
        dense = np.asarray(weights, dtype=np.float64)
        if dense.ndim != 1:
            raise InputError(f"Dense weights must be 1-D, got shape {dense.shape}")
        idx = np.flatnonzero(dense != 1.0)
        return cls(dense.shape[0], idx, dense[idx])

    @classmethod
    def from_sparse(cls, n: int, entries: Mapping[int, float]) -> WeightVector:
        """Build from ``{index: weight}``; unlisted entries are 1.0."""
        idx = np.fromiter(entries.keys(), dtype=np.int64, count=len(entries))
        vals = np.fromiter(entries.values(), dtype=np.float64, count=len(entries))
        return cls(n, idx, vals)

    @cached_property
    def _dense(self) -> npt.NDArray[np.float64]:
        dense = np.ones(self.n, dtype=np.float64)
        dense[self._indices] = self._values
        dense.flags.writeable = False
        return dense

    def dense(self) -> npt.NDArray[np.float64]:
        """Read-only dense length-N array."""
        return self._dense

    def sparse(self) -> dict[int, float]:
        """Entries that differ from 1.0 as ``{index: weight}``."""
        return dict(
            zip(self._indices.tolist(), self._values.tolist(), strict=True)
        )

    def delta_support(
        self,
    ) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64]]:
        """Sparse Δw = w − 1_w as (indices, differences)."""
        return self._indices, self._values - 1.0

    def delta_dense(self) -> npt.NDArray[np.float64]:
        """Dense Δw = w − 1_w."""
        delta = np.zeros(self.n, dtype=np.float64)
        delta[self._indices] = self._values - 1.0
        return delta

    def zero_indices(self) -> npt.NDArray[np.int64]:
        """Indices with weight exactly zero (the left-out data)."""
        return self._indices[self._values == 0.0]

    @property
    def is_ones(self) -> bool:
        return self._indices.size == 0

    @property
    def support_size(self) -> int:
        """Number of entries different from one."""
        return int(self._indices.size)

    def l2_norm(self) -> float:
        """‖w‖₂."""
        explicit = float(np.dot(self._values, self._values))
        return float(np.sqrt(explicit + (self.n - self._indices.size)))

    def total(self) -> float:
        """Σ_n w_n."""
        return float(self._values.sum() + (self.n - self._indices.size))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._indices, other._indices)
            and np.array_equal(self._values, other._values)
        )

    def __hash__(self) -> int:
        return hash((self.n, self._indices.tobytes(), self._values.tobytes()))

    def __repr__(self) -> str:
        preview = dict(list(self.sparse().items())[:5])
        more = "" if self.support_size <= 5 else ", ..."
        return f"WeightVector(n={self.n}, changed={preview}{more})"
