"""
Exact fits and refits of weighted estimating equations.
"""

from .config import SolverOptions
from .linear import (
    iterative_solve,
    smallest_singular_value,
    smallest_singular_value_operator,
)
from .newton import FitResult, solve, warm_start_batch

__all__ = [
    "FitResult",
    "SolverOptions",
    "iterative_solve",
    "smallest_singular_value",
    "smallest_singular_value_operator",
    "solve",
    "warm_start_batch",
]

# keep this list sorted
assert __all__ == sorted(__all__)
