"""
Per-person pose metrics. Inputs are J×3 arrays in meters; lengths come out in
millimeters and PCK-style scores in percent.

A joint counts as correct at threshold t when its error is < t, or when the
error is exactly zero (so a perfect pose scores 100 at every threshold, t=0 included).
"""
import numpy as np

from pose_metrics.procrustes import procrustes_align
from utils.errors import ShapeError

PCK_THRESHOLD_MM = 150.0
PCK_ABS_THRESHOLD_MM = 250.0
AUC_THRESHOLDS_MM = np.arange(0.0, 151.0, 5.0)


def _check(pred: np.ndarray, gt: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 3:
        raise ShapeError(f"expected matching J×3 poses, got {pred.shape} and {gt.shape}")
    return pred, gt


def root_relative_errors_mm(pred, gt, root_index: int = 0) -> np.ndarray:
    pred, gt = _check(pred, gt)
    rel_pred = pred - pred[root_index]
    rel_gt = gt - gt[root_index]
    return np.linalg.norm(rel_pred - rel_gt, axis=1) * 1000.0


def absolute_errors_mm(pred, gt) -> np.ndarray:
    pred, gt = _check(pred, gt)
    return np.linalg.norm(pred - gt, axis=1) * 1000.0


def aligned_errors_mm(pred, gt) -> np.ndarray:
    pred, gt = _check(pred, gt)
    return np.linalg.norm(procrustes_align(pred, gt) - gt, axis=1) * 1000.0


def correct_fraction(errors_mm: np.ndarray, threshold_mm: float) -> float:
    errors_mm = np.asarray(errors_mm)
    return float(np.mean((errors_mm < threshold_mm) | (errors_mm == 0.0)))


def mpjpe(pred, gt, root_index: int = 0) -> float:
    return float(np.mean(root_relative_errors_mm(pred, gt, root_index)))


def mpjpe_pa(pred, gt) -> float:
    return float(np.mean(aligned_errors_mm(pred, gt)))


def pck(pred, gt, root_index: int = 0, threshold_mm: float = PCK_THRESHOLD_MM) -> float:
    return 100.0 * correct_fraction(root_relative_errors_mm(pred, gt, root_index), threshold_mm)


def auc_from_errors(errors_mm: np.ndarray, thresholds_mm=AUC_THRESHOLDS_MM) -> float:
    return float(np.mean([100.0 * correct_fraction(errors_mm, t) for t in thresholds_mm]))


def auc(pred, gt, root_index: int = 0, thresholds_mm=AUC_THRESHOLDS_MM) -> float:
    return auc_from_errors(root_relative_errors_mm(pred, gt, root_index), thresholds_mm)


def pck_abs(pred, gt, threshold_mm: float = PCK_ABS_THRESHOLD_MM) -> float:
    return 100.0 * correct_fraction(absolute_errors_mm(pred, gt), threshold_mm)
