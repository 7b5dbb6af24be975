"""
Concrete estimating equations and the data they are fitted on.
"""

from .dataset import Dataset, read_dataset_csv, write_dataset_csv
from .glm import (
    GlmModel,
    ModelKind,
    held_out_loss,
    inverse_link,
    make_model,
    per_datum_loss,
)
from .stages import OffsetGlmStage, plug_in_two_stage, two_stage_mean
from .synthetic import (
    MAX_POISSON_ETA,
    PRESETS,
    SyntheticSpec,
    generate_synthetic,
    generate_test_split,
    list_presets,
    make_preset,
)

__all__ = [
    "Dataset",
    "GlmModel",
    "MAX_POISSON_ETA",
    "ModelKind",
    "OffsetGlmStage",
    "PRESETS",
    "SyntheticSpec",
    "generate_synthetic",
    "generate_test_split",
    "held_out_loss",
    "inverse_link",
    "list_presets",
    "make_model",
    "make_preset",
    "per_datum_loss",
    "plug_in_two_stage",
    "read_dataset_csv",
    "two_stage_mean",
    "write_dataset_csv",
]

# keep this list sorted
assert __all__ == sorted(__all__)
