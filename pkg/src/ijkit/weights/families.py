"""
Weight-vector families.

Enumeration order for leave-k-out without a limit is lexicographic in the
left-out index tuple: (0, 1, ..., k−1) first. Sampled families keep the
order in which subsets were drawn; indices inside a subset are sorted.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pandas as pd

from ijkit.core import WeightVector
from ijkit.errors import InputError
from ijkit.ij import GradientCache
from ijkit.utils import make_rng

logger = logging.getLogger(__name__)


def _leave_out(n: int, subset: tuple[int, ...]) -> WeightVector:
    return WeightVector(n, subset, np.zeros(len(subset)))


def _floyd_subset(rng: np.random.Generator, n: int, k: int) -> tuple[int, ...]:
    chosen: set[int] = set()
    for j in range(n - k, n):
        t = int(rng.integers(0, j + 1))
        chosen.add(j if t in chosen else t)
    return tuple(sorted(chosen))


def _sampled_subsets(
    n: int, k: int, limit: int, seed: int
) -> Iterator[tuple[int, ...]]:
    rng = make_rng(seed)
    seen: set[tuple[int, ...]] = set()
    while len(seen) < limit:
        subset = _floyd_subset(rng, n, k)
        if subset not in seen:
            seen.add(subset)
            yield subset


def leave_k_out(
    n: int, k: int, limit: int | None = None, seed: int = 0
) -> Iterator[WeightVector]:
    """
    Weight vectors with exactly k zeros and ones elsewhere.

    Args:
        n: Number of data points.
        k: Points left out per vector, 1 ≤ k ≤ n.
        limit: Draw this many distinct subsets uniformly at random instead
            of enumerating all C(n, k). A limit ≥ C(n, k) enumerates.
        seed: Seed for the sampled variant.

    Returns:
        Iterator over the family.

    Raises:
        InputError: k outside [1, n] or limit < 1.
    """
    if not 1 <= k <= n:
        raise InputError(f"leave-k-out needs 1 <= k <= n, got k={k}, n={n}")
    if limit is not None and limit < 1:
        raise InputError(f"limit must be >= 1, got {limit}")

    total = math.comb(n, k)
    if limit is None or limit >= total:
        subsets: Iterator[tuple[int, ...]] = itertools.combinations(range(n), k)
    else:
        logger.debug("Sampling %d of %d leave-%d-out subsets", limit, total, k)
        subsets = _sampled_subsets(n, k, limit, seed)
    return (_leave_out(n, subset) for subset in subsets)


def bootstrap(n: int, b: int, seed: int = 0) -> list[WeightVector]:
    """
    B multinomial(N, 1/N) count vectors; each sums to exactly N.

    Raises:
        InputError: n < 1 or b < 1.
    """
    if n < 1 or b < 1:
        raise InputError(f"bootstrap needs n >= 1 and b >= 1, got {n}, {b}")
    rng = make_rng(seed)
    return [
        WeightVector.from_dense(
            np.bincount(rng.integers(0, n, size=n), minlength=n).astype(
                np.float64
            )
        )
        for _ in range(b)
    ]


def adversarial(cache: GradientCache) -> WeightVector:
    """
    All mass N on the datum with the largest ‖g_n(θ̂₁)‖₁.

    Ties go to the smallest index.
    """
    n = cache.n_points
    norms = np.abs(cache.g_at_base).sum(axis=1)
    index = int(np.argmax(norms))
    dense = np.zeros(n)
    dense[index] = float(n)
    return WeightVector.from_dense(dense)


def load_weights_csv(path: Path, n: int) -> list[WeightVector]:
    """
    Read custom weight vectors, one per row, N comma-separated columns.

    Lines starting with '#' are ignored; there is no header row.

    Raises:
        FileNotFoundError: Missing file.
        InputError: Wrong column count, non-numeric or non-finite values,
            or no rows.
    """
    if not path.exists():
        raise FileNotFoundError(f"Weights file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            header=None,
            comment="#",
            dtype=np.float64,
            float_precision="round_trip",
            encoding="utf-8",
        )
    except (ValueError, pd.errors.EmptyDataError) as e:
        raise InputError(f"Cannot read weights from '{path}': {e}") from e

    values = frame.to_numpy(dtype=np.float64)
    if values.shape[0] == 0:
        raise InputError(f"No weight vectors in '{path}'")
    if values.shape[1] != n:
        raise InputError(
            f"Weight rows in '{path}' have {values.shape[1]} columns, "
            f"dataset has N={n}"
        )
    if not np.all(np.isfinite(values)):
        raise InputError(f"Non-finite weights in '{path}'")
    return [WeightVector.from_dense(row) for row in values]
