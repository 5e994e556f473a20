"""
Default 15-joint skeleton and forward kinematics.

Body frame: x to the person's left, y up, z forward. `place_in_camera` maps a
body-frame pose into camera coordinates (x right, y down, z away from camera).
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from utils.errors import DataError

UP = (0.0, 1.0, 0.0)
DOWN = (0.0, -1.0, 0.0)
LEFT = (1.0, 0.0, 0.0)
RIGHT = (-1.0, 0.0, 0.0)

CAMERA_HEIGHT = 1.5
PELVIS_HEIGHT = 0.95


@dataclass
class SkeletonTemplate:
    joint_names: List[str]
    parents: List[int]
    bone_lengths: List[float]
    directions: List[Tuple[float, float, float]]
    # per-joint std of the random bend (radians)
    angle_sigmas: List[float]

    def __post_init__(self):
        self.validate()

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    def validate(self) -> None:
        n = len(self.joint_names)
        if not (len(self.parents) == len(self.bone_lengths) == len(self.directions) == len(self.angle_sigmas) == n):
            raise DataError("skeleton template fields have inconsistent lengths")
        roots = [j for j, p in enumerate(self.parents) if p < 0]
        if roots != [0]:
            raise DataError(f"skeleton must have exactly one root at index 0, found {roots}")
        for j in range(1, n):
            if not 0 <= self.parents[j] < j:
                raise DataError(f"joint {self.joint_names[j]}: parent index must precede the joint")
            if self.bone_lengths[j] <= 0:
                raise DataError(f"joint {self.joint_names[j]}: bone length must be positive")

    def index(self, name: str) -> int:
        return self.joint_names.index(name)


def default_skeleton() -> SkeletonTemplate:
    joints = [
        # name, parent, length (m), rest direction, bend sigma
        ("pelvis", -1, 0.0, UP, 0.10),
        ("neck", 0, 0.50, UP, 0.12),
        ("head", 1, 0.20, UP, 0.20),
        ("right_shoulder", 1, 0.18, RIGHT, 0.10),
        ("right_elbow", 3, 0.28, DOWN, 0.60),
        ("right_wrist", 4, 0.25, DOWN, 0.60),
        ("left_shoulder", 1, 0.18, LEFT, 0.10),
        ("left_elbow", 6, 0.28, DOWN, 0.60),
        ("left_wrist", 7, 0.25, DOWN, 0.60),
        ("right_hip", 0, 0.10, RIGHT, 0.05),
        ("right_knee", 9, 0.42, DOWN, 0.30),
        ("right_ankle", 10, 0.40, DOWN, 0.30),
        ("left_hip", 0, 0.10, LEFT, 0.05),
        ("left_knee", 12, 0.42, DOWN, 0.30),
        ("left_ankle", 13, 0.40, DOWN, 0.30),
    ]
    return SkeletonTemplate(
        joint_names=[j[0] for j in joints],
        parents=[j[1] for j in joints],
        bone_lengths=[j[2] for j in joints],
        directions=[j[3] for j in joints],
        angle_sigmas=[j[4] for j in joints],
    )


LOWER_BODY_JOINTS = ("right_knee", "right_ankle", "left_knee", "left_ankle")


def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    norm = np.linalg.norm(axis)
    if norm == 0.0 or angle == 0.0:
        return np.eye(3)
    x, y, z = axis / norm
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def forward_kinematics(template: SkeletonTemplate, local_rotations: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Joint positions (J×3, body frame, root at origin) from per-joint local rotations (J×3×3)."""
    n = template.n_joints
    global_rot = np.zeros((n, 3, 3))
    positions = np.zeros((n, 3))
    global_rot[0] = local_rotations[0]
    for j in range(1, n):
        p = template.parents[j]
        global_rot[j] = global_rot[p] @ local_rotations[j]
        offset = np.asarray(template.directions[j]) * template.bone_lengths[j] * scale
        positions[j] = positions[p] + global_rot[j] @ offset
    return positions


def sample_local_rotations(template: SkeletonTemplate, rng: np.random.Generator,
                           overrides: Optional[dict] = None) -> np.ndarray:
    """Random bends around random axes; `overrides` maps joint name to a rotation applied before the bend."""
    rotations = np.zeros((template.n_joints, 3, 3))
    for j in range(template.n_joints):
        axis = rng.normal(size=3)
        angle = rng.normal(0.0, template.angle_sigmas[j])
        bend = axis_angle_matrix(axis, angle)
        if overrides and template.joint_names[j] in overrides:
            bend = overrides[template.joint_names[j]] @ bend
        rotations[j] = bend
    return rotations


def place_in_camera(body_pose: np.ndarray, root_xz: Tuple[float, float], yaw: float) -> np.ndarray:
    """Rotate a body-frame pose by `yaw`, stand it on the floor at `root_xz` and convert to camera axes."""
    world = body_pose @ rotation_y(yaw).T
    world = world + np.array([root_xz[0], PELVIS_HEIGHT, root_xz[1]])
    camera = world.copy()
    camera[:, 1] = CAMERA_HEIGHT - world[:, 1]
    return camera


def facing_yaw(from_xz: Tuple[float, float], to_xz: Tuple[float, float]) -> float:
    """Yaw that turns the body's +z towards `to_xz`."""
    return float(np.arctan2(to_xz[0] - from_xz[0], to_xz[1] - from_xz[1]))
