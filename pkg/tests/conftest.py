import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from pose_refiners.config import ModelConfig  # noqa: E402
from pose_refiners.refiner import init_model  # noqa: E402
from scene_data.generator import CorruptionConfig, DatasetConfig, generate_dataset  # noqa: E402
from scene_data.scene import Scene  # noqa: E402

TOY = dict(d=8, sab_blocks=1, heads=2, decoder_hidden=16)


def random_scene(rng: np.random.Generator, n_persons: int, joints: int, with_gt: bool = True,
                 scene_id: str = "random") -> Scene:
    gt = rng.normal(scale=0.3, size=(n_persons, joints, 3))
    gt[:, :, 2] += rng.uniform(3.0, 8.0, size=(n_persons, 1))
    persons = gt + rng.normal(scale=0.05, size=gt.shape)
    return Scene(id=scene_id, persons=persons, gt=gt if with_gt else None)


def randomize_output(model, seed: int = 1, scale: float = 0.05):
    """A model whose decoder output layer is no longer zero, so corrections are non-trivial."""
    rng = np.random.default_rng(seed)
    params = dict(model.params)
    for name in ("decoder.out.weight", "decoder.out.bias"):
        params[name] = rng.normal(scale=scale, size=params[name].shape)
    return model.replace(params)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_config():
    return ModelConfig(joints=4, **TOY)


@pytest.fixture
def toy_model(toy_config):
    return randomize_output(init_model(toy_config, seed=3))


@pytest.fixture
def small_dataset():
    config = DatasetConfig(corruption=CorruptionConfig(), seed=11)
    return generate_dataset(24, config)


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    monkeypatch.delenv("SETREF_SEED", raising=False)
    monkeypatch.setenv("SETREF_DATA_DIR", str(tmp_path / "data"))
