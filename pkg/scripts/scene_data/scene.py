from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from utils.errors import SceneValidationError


@dataclass
class Scene:
    """N persons × J joints × xyz, meters, absolute camera frame (+z away from camera)."""
    id: str
    persons: np.ndarray
    gt: Optional[np.ndarray] = None
    root_index: int = 0

    def __post_init__(self):
        self.persons = np.asarray(self.persons, dtype=np.float64)
        if self.gt is not None:
            self.gt = np.asarray(self.gt, dtype=np.float64)
        self.validate()

    @property
    def n_persons(self) -> int:
        return self.persons.shape[0]

    @property
    def n_joints(self) -> int:
        return self.persons.shape[1]

    @property
    def has_gt(self) -> bool:
        return self.gt is not None

    def validate(self) -> None:
        if self.persons.ndim != 3 or self.persons.shape[-1] != 3:
            raise SceneValidationError(f"persons must be N×J×3, got shape {self.persons.shape}", self.id)
        if self.persons.shape[0] < 1:
            raise SceneValidationError("a scene needs at least one person", self.id)
        if self.persons.shape[1] < 2:
            raise SceneValidationError(f"persons need at least 2 joints, got {self.persons.shape[1]}", self.id)
        if not 0 <= self.root_index < self.persons.shape[1]:
            raise SceneValidationError(f"root index {self.root_index} out of range", self.id)
        if not np.all(np.isfinite(self.persons)):
            raise SceneValidationError("persons contain non-finite coordinates", self.id)
        if self.gt is not None:
            if self.gt.shape != self.persons.shape:
                raise SceneValidationError(
                    f"gt shape {self.gt.shape} does not match persons shape {self.persons.shape}", self.id)
            if not np.all(np.isfinite(self.gt)):
                raise SceneValidationError("gt contains non-finite coordinates", self.id)

    def permuted(self, order: Sequence[int]) -> "Scene":
        order = list(order)
        return Scene(
            id=self.id,
            persons=self.persons[order],
            gt=None if self.gt is None else self.gt[order],
            root_index=self.root_index,
        )

    def with_persons(self, persons: np.ndarray) -> "Scene":
        return Scene(id=self.id, persons=persons, gt=self.gt, root_index=self.root_index)


Dataset = List[Scene]


def require_gt(scenes: Sequence[Scene]) -> None:
    for scene in scenes:
        if not scene.has_gt:
            raise SceneValidationError("ground truth is required here", scene.id)
