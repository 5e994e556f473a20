from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from scene_data.scene import Dataset, Scene
from scene_data.skeleton import (LOWER_BODY_JOINTS, SkeletonTemplate, default_skeleton, facing_yaw,
                                 forward_kinematics, place_in_camera, rotation_x, sample_local_rotations)
from utils.errors import ConfigError

INTERACTIONS = ("handshake", "group", "independent")
BENCHMARK_SCENES = 15000

HANDSHAKE_DISTANCE = 1.0
HANDSHAKE_JITTER = 0.03
GROUP_RADIUS = 1.5
AREA_X = (-3.0, 3.0)
AREA_Z = (3.0, 9.0)


@dataclass
class CorruptionConfig:
    joint_noise_sigma: float = 0.05
    depth_offset_sigma: float = 0.20
    truncation_prob: float = 0.2
    truncation_noise_sigma: float = 0.15
    seed: int = 0

    def __post_init__(self):
        for name in ("joint_noise_sigma", "depth_offset_sigma", "truncation_noise_sigma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.truncation_prob <= 1.0:
            raise ConfigError(f"truncation_prob must be in [0, 1], got {self.truncation_prob}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CorruptionConfig":
        return cls(**data)


@dataclass
class DatasetConfig:
    # None: handshake scenes get 2 persons, group 2-5, independent 1-4
    persons: Optional[int] = None
    mix: Tuple[float, float, float] = (0.4, 0.4, 0.2)
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    seed: int = 0

    def __post_init__(self):
        self.mix = tuple(float(w) for w in self.mix)
        if len(self.mix) != len(INTERACTIONS) or any(w < 0 for w in self.mix) or sum(self.mix) <= 0:
            raise ConfigError(f"mix needs {len(INTERACTIONS)} non-negative weights, got {self.mix}")
        if self.persons is not None and self.persons < 1:
            raise ConfigError(f"persons must be >= 1, got {self.persons}")
        if isinstance(self.corruption, dict):
            self.corruption = CorruptionConfig.from_dict(self.corruption)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mix"] = list(self.mix)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetConfig":
        return cls(**data)


def _sample_person(template: SkeletonTemplate, rng: np.random.Generator, overrides=None) -> np.ndarray:
    scale = rng.uniform(0.9, 1.1)
    return forward_kinematics(template, sample_local_rotations(template, rng, overrides), scale)


def _independent_people(template, n, rng):
    poses = []
    for _ in range(n):
        root = (rng.uniform(*AREA_X), rng.uniform(*AREA_Z))
        yaw = rng.uniform(-np.pi, np.pi)
        poses.append(place_in_camera(_sample_person(template, rng), root, yaw))
    return poses


def _group_people(template, n, rng):
    center = (rng.uniform(-1.5, 1.5), rng.uniform(4.0, 7.0))
    poses = []
    for _ in range(n):
        r = GROUP_RADIUS * np.sqrt(rng.uniform())
        theta = rng.uniform(-np.pi, np.pi)
        root = (center[0] + r * np.cos(theta), center[1] + r * np.sin(theta))
        poses.append(place_in_camera(_sample_person(template, rng), root, facing_yaw(root, center)))
    return poses


def _handshake_pair(template, rng):
    wrist = template.index("right_wrist")
    # upper arm and forearm raised towards the partner
    reach = {"right_elbow": rotation_x(-1.2), "right_wrist": rotation_x(-0.4)}
    root_a = (rng.uniform(-2.0, 2.0), rng.uniform(3.5, 7.0))
    yaw_a = rng.uniform(-np.pi, np.pi)
    root_b = (root_a[0] + HANDSHAKE_DISTANCE * np.sin(yaw_a), root_a[1] + HANDSHAKE_DISTANCE * np.cos(yaw_a))
    a = place_in_camera(_sample_person(template, rng, reach), root_a, yaw_a)
    b = place_in_camera(_sample_person(template, rng, reach), root_b, facing_yaw(root_b, root_a))
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    jitter = direction * rng.uniform(0.0, HANDSHAKE_JITTER)
    b = b + (a[wrist] + jitter - b[wrist])
    return [a, b]


def _handshake_people(template, n, rng):
    poses = []
    while len(poses) + 2 <= n:
        poses.extend(_handshake_pair(template, rng))
    if len(poses) < n:
        poses.extend(_independent_people(template, n - len(poses), rng))
    return poses


def corrupt(gt: np.ndarray, template: SkeletonTemplate, corruption: CorruptionConfig,
            rng: np.random.Generator) -> np.ndarray:
    """Simulate an initial estimator: joint jitter, per-person depth shift, noisy legs when truncated."""
    lower = [template.index(name) for name in LOWER_BODY_JOINTS if name in template.joint_names]
    persons = gt.copy()
    for n in range(gt.shape[0]):
        jitter = rng.normal(size=gt.shape[1:]) * corruption.joint_noise_sigma
        depth = rng.normal() * corruption.depth_offset_sigma
        truncated = rng.uniform() < corruption.truncation_prob
        leg_noise = rng.normal(size=(len(lower), 3)) * corruption.truncation_noise_sigma
        persons[n] = persons[n] + jitter
        persons[n, :, 2] = persons[n, :, 2] + depth
        if truncated:
            persons[n, lower] = persons[n, lower] + leg_noise
    return persons


def generate_scene(template: SkeletonTemplate, n_persons: int, interaction: str,
                   corruption: CorruptionConfig, seed: int, scene_id: str = None) -> Scene:
    if n_persons < 1:
        raise ConfigError(f"n_persons must be >= 1, got {n_persons}")
    if interaction not in INTERACTIONS:
        raise ConfigError(f"unknown interaction '{interaction}', expected one of {INTERACTIONS}")
    template.validate()

    pose_rng = np.random.default_rng(np.random.SeedSequence(seed))
    noise_rng = np.random.default_rng(np.random.SeedSequence([seed, corruption.seed, 1]))

    if interaction == "handshake":
        poses = _handshake_people(template, n_persons, pose_rng)
    elif interaction == "group":
        poses = _group_people(template, n_persons, pose_rng)
    else:
        poses = _independent_people(template, n_persons, pose_rng)

    gt = np.stack(poses)
    persons = corrupt(gt, template, corruption, noise_rng)
    return Scene(id=scene_id or f"{interaction}_{seed}", persons=persons, gt=gt)


def _persons_for(interaction: str, rng: np.random.Generator) -> int:
    if interaction == "handshake":
        return 2
    if interaction == "group":
        return int(rng.integers(2, 6))
    return int(rng.integers(1, 5))


def generate_dataset(count: int = BENCHMARK_SCENES, config: DatasetConfig = None,
                     template: SkeletonTemplate = None, progress: bool = False) -> Dataset:
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    config = config or DatasetConfig()
    template = template or default_skeleton()

    weights = np.asarray(config.mix) / sum(config.mix)
    children = np.random.SeedSequence(config.seed).spawn(count)
    scenes = []
    for index, child in enumerate(tqdm(children, desc="Generating scenes", disable=not progress)):
        rng = np.random.default_rng(child)
        interaction = INTERACTIONS[int(rng.choice(len(INTERACTIONS), p=weights))]
        n_persons = config.persons or _persons_for(interaction, rng)
        scene_seed = int(rng.integers(0, 2**63 - 1))
        scenes.append(generate_scene(template, n_persons, interaction, config.corruption, scene_seed,
                                     scene_id=f"scene_{index:06d}_{interaction}"))
    return scenes
