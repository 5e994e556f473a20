from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from autodiff.adam import DEFAULT_LR, AdamState, adam_step
from autodiff.tensor import Tape, add, scale
from pose_metrics.report import evaluate
from pose_refiners.refiner import RefinerModel, forward, loss, refine, scene_loss
from scene_data.kfold import DEFAULT_FOLDS
from scene_data.scene import Scene, require_gt
from utils.errors import ConfigError, NonFiniteError
from utils.run_log import RunLog


@dataclass
class TrainingConfig:
    epochs: int = 50
    batch_size: int = 32
    lr: float = DEFAULT_LR
    folds: int = DEFAULT_FOLDS
    fold_index: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr > 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if not 0 <= self.fold_index < self.folds:
            raise ConfigError(f"fold index {self.fold_index} out of range for {self.folds} folds")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        return cls(**data)


def mean_scene_loss(model: RefinerModel, scenes: Sequence[Scene]) -> float:
    return float(np.mean([loss(refine(model, scene).refined, scene.gt) for scene in scenes]))


def batch_gradients(model: RefinerModel, batch: Sequence[Scene]) -> Tuple[float, List[float], Dict[str, np.ndarray]]:
    """Mean scene loss over the batch, the per-scene losses and the gradient of the mean."""
    tape = Tape()
    weights = model.bind(tape)
    total = None
    scene_losses = []
    for scene in batch:
        l = scene_loss(forward(model, tape, scene, weights).refined, scene.gt)
        scene_losses.append(float(l.data[0]))
        total = l if total is None else add(total, l)
    mean = scale(total, 1.0 / len(batch))
    tape.backward(mean)
    grads = {name: w.grad if w.grad is not None else np.zeros_like(w.data) for name, w in weights.items()}
    return float(mean.data[0]), scene_losses, grads


def train_model(model: RefinerModel, train: Sequence[Scene], heldout: Sequence[Scene],
                config: TrainingConfig, log: Optional[RunLog] = None,
                progress: bool = False) -> Tuple[RefinerModel, List[dict]]:
    """Mini-batch Adam on the mean per-scene loss. Epoch 0 is the untrained model."""
    train = list(train)
    heldout = list(heldout)
    require_gt(train)
    require_gt(heldout)
    if not train:
        raise ConfigError("training set is empty")

    state = AdamState(lr=config.lr)
    rng = np.random.default_rng(config.seed)
    history = []

    def record(epoch: int, train_loss: float) -> None:
        entry = {"epoch": epoch, "train_loss": train_loss}
        if heldout:
            entry["heldout_mpjpe_mm"] = evaluate(heldout, model).mpjpe_mm
        history.append(entry)
        if log:
            log.log("epoch", **entry)

    record(0, mean_scene_loss(model, train))

    for epoch in tqdm(range(1, config.epochs + 1), desc="Training", disable=not progress):
        order = rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(train), config.batch_size):
            batch = [train[i] for i in order[start:start + config.batch_size]]
            try:
                _, scene_losses, grads = batch_gradients(model, batch)
                model = model.replace(adam_step(model.params, grads, state))
            except NonFiniteError as e:
                raise NonFiniteError(f"epoch {epoch}, batch starting at {start}: {e}")
            epoch_losses.extend(scene_losses)
        record(epoch, float(np.mean(epoch_losses)))

    return model, history
