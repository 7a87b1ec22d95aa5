"""
Small settings and task artifacts shared by the tests that train networks.
"""

from functools import lru_cache
from typing import Dict, Optional

from auxcell import AuxCellSettingsModel
from auxcell.settings import get_settings, merge_settings
from auxcell.tasks import TaskArtifacts, prepare_task


TINY = {
    "task": {
        "image_size": 16,
        "num_classes": 3,
        "min_shapes": 1,
        "max_shapes": 2,
        "train_pool_size": 24,
        "val_fraction": 0.25,
        "holdout_size": 8,
    },
    "encoder": {"channels": [4, 4, 6, 8], "prefit_epochs": 1},
    "teacher": {"adapt_channels": 8, "min_reward": 0.0, "max_epochs": 1},
    "network": {"search_adapt_channels": 4, "train_adapt_channels": 6, "batch_size": 8},
    "controller": {"hidden": 16, "embed_dim": 8},
    "search": {"total_architectures": 8, "stage1_epochs": 1, "stage2_epochs": 1, "top_k": 3},
    "full_train": {"stage_epochs": [1, 2], "aux_coeffs": [0.3, 0.2]},
    "ablation": {"architectures": 3},
}


def tiny_settings(overrides: Optional[Dict] = None) -> AuxCellSettingsModel:
    settings = merge_settings(get_settings(), TINY)
    return merge_settings(settings, overrides) if overrides else settings


@lru_cache(maxsize=None)
def tiny_artifacts() -> TaskArtifacts:
    """Built once per test session, in memory. Callers must not modify it."""
    return prepare_task(tiny_settings())
