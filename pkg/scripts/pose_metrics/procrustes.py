from typing import Tuple

import numpy as np

from utils.errors import NumericError, ShapeError


class DegenerateAlignmentError(NumericError):
    pass


def similarity_transform(pred: np.ndarray, gt: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Rotation R, scale s and translation t minimizing sum_j ||s R pred_j + t - gt_j||².
    Reflections are excluded by flipping the weakest singular direction.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 3:
        raise ShapeError(f"expected matching J×3 poses, got {pred.shape} and {gt.shape}")
    if pred.shape[0] < 3:
        raise DegenerateAlignmentError(f"Procrustes alignment needs at least 3 joints, got {pred.shape[0]}")

    mu_pred = pred.mean(axis=0)
    mu_gt = gt.mean(axis=0)
    x = pred - mu_pred
    y = gt - mu_gt

    gt_singular = np.linalg.svd(y, compute_uv=False)
    if gt_singular[1] <= 1e-9 * max(gt_singular[0], 1.0):
        raise DegenerateAlignmentError("ground-truth joints are collinear; alignment is undefined")
    var_pred = np.sum(x ** 2)
    if var_pred <= 1e-18:
        raise DegenerateAlignmentError("predicted joints collapse to a single point; alignment is undefined")

    cov = y.T @ x
    u, d, vt = np.linalg.svd(cov)
    flip = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0.0:
        flip[2, 2] = -1.0
    rotation = u @ flip @ vt
    s = float(np.trace(np.diag(d) @ flip) / var_pred)
    t = mu_gt - s * rotation @ mu_pred
    return rotation, s, t


def procrustes_align(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    rotation, s, t = similarity_transform(pred, gt)
    return s * np.asarray(pred, dtype=np.float64) @ rotation.T + t
