"""Scene files: line-delimited JSON, one scene per line.

    {"id": "...", "persons": [[[x, y, z], ...J], ...N], "gt": <same shape, optional>}

Floats are written with Python's shortest round-tripping repr, so a
write/read cycle reproduces every coordinate exactly.
"""
import json
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from scene_data.scene import Dataset, Scene
from utils.errors import SceneFileError, SceneValidationError


def scene_to_record(scene: Scene) -> dict:
    record = {"id": scene.id, "persons": scene.persons.tolist()}
    if scene.gt is not None:
        record["gt"] = scene.gt.tolist()
    if scene.root_index != 0:
        record["root_index"] = scene.root_index
    return record


def _is_coordinate(value) -> bool:
    # JSON true/false arrive as bool, a subclass of int
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _as_pose_array(value, key: str, scene_id: str, expected_joints: Optional[int]) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SceneValidationError(f"'{key}' must be a non-empty list of persons (N >= 1)", scene_id)
    joint_counts = []
    for n, person in enumerate(value):
        if not isinstance(person, list):
            raise SceneValidationError(f"'{key}' person {n} is not a list of joints", scene_id)
        joint_counts.append(len(person))
        for j, joint in enumerate(person):
            if not isinstance(joint, list) or len(joint) != 3:
                raise SceneValidationError(f"'{key}' person {n} joint {j} is not an [x, y, z] triple", scene_id)
            if not all(_is_coordinate(c) for c in joint):
                raise SceneValidationError(f"'{key}' person {n} joint {j} has a non-numeric coordinate", scene_id)
    reference = expected_joints if expected_joints is not None else joint_counts[0]
    for n, count in enumerate(joint_counts):
        if count != reference:
            raise SceneValidationError(f"'{key}' person {n} has {count} joints, expected {reference}", scene_id)
    return np.array(value, dtype=np.float64)


def record_to_scene(record: dict, expected_joints: Optional[int] = None) -> Scene:
    if not isinstance(record, dict):
        raise SceneValidationError("a scene line must be a JSON object")
    scene_id = record.get("id")
    if not isinstance(scene_id, str):
        raise SceneValidationError("scene is missing a string 'id'")
    if "persons" not in record:
        raise SceneValidationError("scene is missing 'persons'", scene_id)
    persons = _as_pose_array(record["persons"], "persons", scene_id, expected_joints)
    gt = None
    if record.get("gt") is not None:
        gt = _as_pose_array(record["gt"], "gt", scene_id, persons.shape[1])
    return Scene(id=scene_id, persons=persons, gt=gt, root_index=int(record.get("root_index", 0)))


def read_scenes(path, expected_joints: Optional[int] = None) -> Dataset:
    path = Path(path)
    scenes: List[Scene] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise SceneFileError(f"invalid JSON: {e.msg} (byte {e.pos})", path, lineno, e.colno)
            try:
                scenes.append(record_to_scene(record, expected_joints))
            except SceneValidationError as e:
                located = SceneValidationError(f"{path}:{lineno}: {e}")
                located.scene_id = e.scene_id
                raise located
    return scenes


def write_scenes(path, dataset: Iterable[Scene]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for scene in dataset:
            f.write(json.dumps(scene_to_record(scene)) + "\n")
    return path
