"""
Estimating-equation core.

Weighted estimating equations, their aggregates G and H, and numerical
validation of analytic Jacobians.
"""

from .aggregate import (
    check_finite,
    eval_G,
    eval_H,
    finite_diff_check,
    hvp,
    weighted_sum,
)
from .equation import (
    BoundStage,
    CoupledStage,
    Coupling,
    EstimatingEquation,
    IdentityCoupling,
    StackedEquation,
    stack_equations,
)
from .types import Parameter, WeightVector, as_parameter

__all__ = [
    "BoundStage",
    "CoupledStage",
    "Coupling",
    "EstimatingEquation",
    "IdentityCoupling",
    "Parameter",
    "StackedEquation",
    "WeightVector",
    "as_parameter",
    "check_finite",
    "eval_G",
    "eval_H",
    "finite_diff_check",
    "hvp",
    "stack_equations",
    "weighted_sum",
]

# keep this list sorted
assert __all__ == sorted(__all__)
