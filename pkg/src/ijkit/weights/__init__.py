"""
Weight-vector families: leave-k-out, bootstrap, adversarial and custom.
"""

from .config import WeightFamily, build_family
from .families import adversarial, bootstrap, leave_k_out, load_weights_csv

__all__ = [
    "WeightFamily",
    "adversarial",
    "bootstrap",
    "build_family",
    "leave_k_out",
    "load_weights_csv",
]

# keep this list sorted
assert __all__ == sorted(__all__)
