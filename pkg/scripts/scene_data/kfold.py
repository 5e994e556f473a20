from typing import List, Tuple

import numpy as np

from scene_data.scene import Dataset
from utils.errors import ConfigError

DEFAULT_FOLDS = 10


def fold_indices(size: int, k: int, seed: int = 0) -> List[np.ndarray]:
    """Seeded shuffle, then k contiguous chunks whose sizes differ by at most one."""
    order = np.random.default_rng(seed).permutation(size)
    return np.array_split(order, k)


def kfold(dataset: Dataset, k: int = DEFAULT_FOLDS, fold_index: int = 0, seed: int = 0) -> Tuple[Dataset, Dataset]:
    if not 1 <= k <= len(dataset):
        raise ConfigError(f"k must be in [1, {len(dataset)}], got {k}")
    if not 0 <= fold_index < k:
        raise ConfigError(f"fold index {fold_index} out of range for k={k}")
    folds = fold_indices(len(dataset), k, seed)
    test_idx = set(folds[fold_index].tolist())
    train = [scene for i, scene in enumerate(dataset) if i not in test_idx]
    test = [dataset[i] for i in sorted(test_idx)]
    return train, test


def parse_fold(value: str) -> Tuple[int, int]:
    """'10/3' -> (10, 3)."""
    try:
        k, i = (int(part) for part in value.split("/"))
    except ValueError:
        raise ConfigError(f"fold must look like 'k/i', got '{value}'")
    if not 0 <= i < k:
        raise ConfigError(f"fold index {i} out of range for k={k}")
    return k, i
