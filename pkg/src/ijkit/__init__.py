"""
ijkit - Infinitesimal Jackknife Toolkit

Top-level package: fast approximate cross-validation and bootstrap for
weighted M-estimators, with computable error certificates.
"""

__version__ = "0.1.0"

from . import bounds, core, harness, ij, models, solver, utils, weights

__all__ = [
    "bounds",
    "core",
    "harness",
    "ij",
    "models",
    "solver",
    "utils",
    "weights",
]
