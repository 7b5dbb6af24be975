"""
Infinitesimal-jackknife engine.
"""

from .engine import (
    DEFAULT_QUAD_POINTS,
    GradientCache,
    HessianHandle,
    build_handle,
    dtheta_dw_action,
    ij_batch,
    ij_covariance,
    ij_predict,
    influence_scores,
    integrated_hessian,
)

__all__ = [
    "DEFAULT_QUAD_POINTS",
    "GradientCache",
    "HessianHandle",
    "build_handle",
    "dtheta_dw_action",
    "ij_batch",
    "ij_covariance",
    "ij_predict",
    "influence_scores",
    "integrated_hessian",
]

# keep this list sorted
assert __all__ == sorted(__all__)
