"""
Joint-perturbation interaction matrix: displace one joint at a time and record
how far every joint of the refined output moves.
"""
import asyncio
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from pose_refiners.refiner import RefinerModel, check_scene, refine
from scene_data.scene import Scene
from utils.errors import UsageError

DEFAULT_DELTA = 0.10
AXES = ("joint", "separate")


@dataclass
class PerturbationMatrix:
    # M[r, c]: response of joint r to a displacement of joint c, in meters
    values: np.ndarray
    labels: List[str]
    n_persons: int
    n_joints: int

    def person_block(self, affected: int, perturbed: int) -> np.ndarray:
        j = self.n_joints
        return self.values[affected * j:(affected + 1) * j, perturbed * j:(perturbed + 1) * j]

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow([""] + self.labels)
            for label, row in zip(self.labels, self.values):
                writer.writerow([label] + [repr(float(v)) for v in row])
        return path


def joint_labels(n_persons: int, n_joints: int) -> List[str]:
    return [f"p{n}_j{j}" for n in range(n_persons) for j in range(n_joints)]


def _displacements(delta: float, axes: str) -> List[np.ndarray]:
    if axes == "joint":
        return [np.full(3, delta)]
    return [delta * np.eye(3)[axis] for axis in range(3)]


def perturbation_column(model: RefinerModel, scene: Scene, baseline: np.ndarray, person: int, joint: int,
                        delta: float = DEFAULT_DELTA, axes: str = "joint") -> np.ndarray:
    """Max-abs coordinate change of every joint (flattened N·J) when (person, joint) is displaced."""
    response = np.zeros(baseline.shape[0] * baseline.shape[1])
    for shift in _displacements(delta, axes):
        persons = scene.persons.copy()
        persons[person, joint] += shift
        moved = refine(model, scene.with_persons(persons)).refined
        response = np.maximum(response, np.abs(moved - baseline).max(axis=2).reshape(-1))
    return response


async def _column_task(semaphore: asyncio.Semaphore, pbar, *args, **kwargs) -> np.ndarray:
    async with semaphore:
        column = await asyncio.to_thread(perturbation_column, *args, **kwargs)
    pbar.update(1)
    return column


async def _all_columns(model, scene, baseline, delta, axes, workers, progress) -> List[np.ndarray]:
    semaphore = asyncio.Semaphore(workers)
    pbar = tqdm(total=scene.n_persons * scene.n_joints, desc="Perturbing joints", disable=not progress)
    tasks = [
        asyncio.create_task(_column_task(semaphore, pbar, model, scene, baseline, n, j, delta=delta, axes=axes))
        for n in range(scene.n_persons) for j in range(scene.n_joints)
    ]
    # gather keeps task order, so the column layout is fixed whatever finishes first
    columns = await asyncio.gather(*tasks)
    pbar.close()
    return columns


def perturbation_matrix(model: RefinerModel, scene: Scene, delta: float = DEFAULT_DELTA, axes: str = "joint",
                        workers: int = 1, progress: bool = False) -> PerturbationMatrix:
    """
    Rows are affected joints, columns perturbed joints, both ordered person-major.
    `axes="joint"` applies (+δ,+δ,+δ) once; `axes="separate"` applies +δ on x, y and z
    in turn and keeps the largest response.
    """
    if axes not in AXES:
        raise UsageError(f"axes must be one of {AXES}, got '{axes}'")
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    check_scene(model.config, scene)

    baseline = refine(model, scene).refined
    columns = asyncio.run(_all_columns(model, scene, baseline, delta, axes, workers, progress))
    return PerturbationMatrix(values=np.stack(columns, axis=1),
                              labels=joint_labels(scene.n_persons, scene.n_joints),
                              n_persons=scene.n_persons,
                              n_joints=scene.n_joints)


def interaction_summary(matrix: PerturbationMatrix) -> Dict[str, Optional[float]]:
    """Mean response inside a person's own block vs across persons."""
    n = matrix.n_persons
    own = [matrix.person_block(p, p) for p in range(n)]
    cross = [matrix.person_block(p, q) for p in range(n) for q in range(n) if p != q]
    own_mean = float(np.mean(own))
    cross_mean = float(np.mean(cross)) if cross else None
    return {
        "own_mean_m": own_mean,
        "cross_mean_m": cross_mean,
        "cross_max_m": float(np.max(cross)) if cross else None,
        "cross_to_own": cross_mean / own_mean if cross_mean is not None and own_mean > 0 else None,
    }
