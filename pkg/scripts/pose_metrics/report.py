from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from pose_metrics.joint_metrics import (AUC_THRESHOLDS_MM, PCK_ABS_THRESHOLD_MM, PCK_THRESHOLD_MM,
                                        absolute_errors_mm, aligned_errors_mm, auc_from_errors, correct_fraction,
                                        root_relative_errors_mm)
from pose_refiners.refiner import RefinerModel, refine
from scene_data.scene import Scene, require_gt
from utils.errors import DataError

REPORT_KEYS = ("mpjpe_mm", "mpjpe_pa_mm", "pck_pct", "auc_pct", "pck_abs_pct")


@dataclass
class MetricReport:
    mpjpe_mm: float
    mpjpe_pa_mm: Optional[float]
    pck_pct: float
    auc_pct: float
    pck_abs_pct: float
    mpjpe_abs_mm: float
    root_depth_error_mm: float
    joint_count: int
    per_scene: List[Dict] = field(default_factory=list)

    def summary(self) -> Dict:
        return {
            "mpjpe_mm": self.mpjpe_mm,
            "mpjpe_pa_mm": self.mpjpe_pa_mm,
            "pck_pct": self.pck_pct,
            "auc_pct": self.auc_pct,
            "pck_abs_pct": self.pck_abs_pct,
            "mpjpe_abs_mm": self.mpjpe_abs_mm,
            "root_depth_error_mm": self.root_depth_error_mm,
            "joint_count": self.joint_count,
        }

    def to_dict(self) -> Dict:
        return {**self.summary(), "per_scene": self.per_scene}


class _ErrorPool:
    """Joint errors collected across persons; all aggregates are joint-weighted means."""

    def __init__(self):
        self.rel: List[np.ndarray] = []
        self.aligned: List[np.ndarray] = []
        self.absolute: List[np.ndarray] = []
        self.root_depth: List[float] = []

    def add_person(self, pred: np.ndarray, gt: np.ndarray, root_index: int, with_alignment: bool) -> None:
        self.rel.append(root_relative_errors_mm(pred, gt, root_index))
        self.absolute.append(absolute_errors_mm(pred, gt))
        if with_alignment:
            self.aligned.append(aligned_errors_mm(pred, gt))
        self.root_depth.append(abs(pred[root_index, 2] - gt[root_index, 2]) * 1000.0)

    def extend(self, other: "_ErrorPool") -> None:
        self.rel.extend(other.rel)
        self.aligned.extend(other.aligned)
        self.absolute.extend(other.absolute)
        self.root_depth.extend(other.root_depth)

    def metrics(self, pck_threshold_mm: float, pck_abs_threshold_mm: float, auc_thresholds_mm) -> Dict:
        rel = np.concatenate(self.rel)
        absolute = np.concatenate(self.absolute)
        return {
            "mpjpe_mm": float(np.mean(rel)),
            "mpjpe_pa_mm": float(np.mean(np.concatenate(self.aligned))) if self.aligned else None,
            "pck_pct": 100.0 * correct_fraction(rel, pck_threshold_mm),
            "auc_pct": auc_from_errors(rel, auc_thresholds_mm),
            "pck_abs_pct": 100.0 * correct_fraction(absolute, pck_abs_threshold_mm),
            "mpjpe_abs_mm": float(np.mean(absolute)),
            "root_depth_error_mm": float(np.mean(self.root_depth)),
        }


def evaluate(scenes: Sequence[Scene], predictions: Union[RefinerModel, Sequence[np.ndarray], None] = None,
             pck_threshold_mm: float = PCK_THRESHOLD_MM, pck_abs_threshold_mm: float = PCK_ABS_THRESHOLD_MM,
             auc_thresholds_mm=AUC_THRESHOLDS_MM, progress: bool = False) -> MetricReport:
    """
    Score predictions against each scene's gt. `predictions` is a RefinerModel
    (scenes are refined first), one N×J×3 array per scene, or None to score the
    scenes' own `persons` (the initial estimates).
    """
    scenes = list(scenes)
    require_gt(scenes)
    if not scenes:
        raise DataError("nothing to evaluate")

    total = _ErrorPool()
    per_scene = []
    joint_count = 0
    for index, scene in enumerate(tqdm(scenes, desc="Evaluating scenes", disable=not progress)):
        if isinstance(predictions, RefinerModel):
            pred = refine(predictions, scene).refined
        elif predictions is not None:
            pred = np.asarray(predictions[index], dtype=np.float64)
        else:
            pred = scene.persons

        pool = _ErrorPool()
        with_alignment = scene.n_joints >= 3
        for n in range(scene.n_persons):
            pool.add_person(pred[n], scene.gt[n], scene.root_index, with_alignment)
        per_scene.append({"id": scene.id, "persons": scene.n_persons,
                          **pool.metrics(pck_threshold_mm, pck_abs_threshold_mm, auc_thresholds_mm)})
        total.extend(pool)
        joint_count += scene.n_persons * scene.n_joints

    if any(s.n_joints < 3 for s in scenes):
        total.aligned = []
    aggregate = total.metrics(pck_threshold_mm, pck_abs_threshold_mm, auc_thresholds_mm)
    return MetricReport(**aggregate, joint_count=joint_count, per_scene=per_scene)


def compare_reports(refined: MetricReport, initial: MetricReport) -> Dict:
    """Side-by-side refined vs initial with refined-minus-initial deltas."""
    a, b = refined.summary(), initial.summary()
    delta = {key: (a[key] - b[key]) if a[key] is not None and b[key] is not None else None
             for key in REPORT_KEYS + ("mpjpe_abs_mm", "root_depth_error_mm")}
    return {"refined": refined.to_dict(), "initial": initial.to_dict(), "delta": delta}
