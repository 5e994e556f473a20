"""
The refiner network: project persons (or joints) into a set, run K SABs and a
one-seed PMA to get the interaction embedding e, then decode a per-person
correction from concat(e, FF(person)) and add it to the initial poses.
"""
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from autodiff.tensor import (Tape, Tensor, add, concat_cols, concat_rows, relu, repeat_rows, scale, slice_rows,
                             sub, sum_squares)
from pose_refiners.config import ModelConfig
from pose_refiners.set_attention import (AttentionBlock, ParameterShapes, linear, linear_shapes, mab_shapes,
                                         pma_forward, pma_shapes, sab_forward)
from scene_data.scene import Scene
from utils.errors import ModelFileError, SceneValidationError, ShapeError


def parameter_shapes(config: ModelConfig) -> ParameterShapes:
    d = config.d
    shapes: ParameterShapes = OrderedDict()
    shapes.update(linear_shapes("person_proj", config.person_width, d))
    if config.mode == "scene":
        shapes.update(linear_shapes("joint_proj", 3, d))
    for k in range(config.sab_blocks):
        shapes.update(mab_shapes(f"sab{k}", d))
    shapes.update(pma_shapes("pma", d))
    shapes.update(linear_shapes("decoder.hidden", 2 * d, config.decoder_hidden))
    shapes.update(linear_shapes("decoder.out", config.decoder_hidden, config.person_width))
    return shapes


def parameter_count(config: ModelConfig) -> int:
    return int(sum(np.prod(shape) for shape, _ in parameter_shapes(config).values()))


class RefinerModel:
    def __init__(self, config: ModelConfig, params: Mapping[str, np.ndarray]):
        expected = parameter_shapes(config)
        if list(params) != list(expected):
            missing = sorted(set(expected) - set(params))
            extra = sorted(set(params) - set(expected))
            raise ModelFileError(f"parameter names do not match the config (missing={missing}, extra={extra})")
        for name, (shape, _) in expected.items():
            if tuple(params[name].shape) != shape:
                raise ModelFileError(f"parameter '{name}' has shape {params[name].shape}, expected {shape}")
        self.config = config
        self.params: Dict[str, np.ndarray] = OrderedDict(
            (name, np.asarray(value, dtype=np.float64)) for name, value in params.items())

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def bind(self, tape: Tape, overrides: Optional[Mapping[str, Tensor]] = None) -> Dict[str, Tensor]:
        """Every parameter as a leaf on `tape` (or the given override tensor)."""
        overrides = overrides or {}
        return {name: overrides[name] if name in overrides else tape.parameter(value)
                for name, value in self.params.items()}

    def replace(self, params: Mapping[str, np.ndarray]) -> "RefinerModel":
        return RefinerModel(self.config, params)


def init_model(config: ModelConfig, seed: int = 0, zero_output: bool = True) -> RefinerModel:
    """Glorot-uniform weights, zero biases, unit layer-norm gains; zero decoder output layer by default."""
    rng = np.random.default_rng(seed)
    params = OrderedDict()
    for name, (shape, kind) in parameter_shapes(config).items():
        if kind in ("weight", "seed"):
            fan_in, fan_out = shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            value = rng.uniform(-limit, limit, size=shape)
        elif kind == "gain":
            value = np.ones(shape)
        else:
            value = np.zeros(shape)
        if zero_output and name.startswith("decoder.out."):
            value = np.zeros(shape)
        params[name] = value
    return RefinerModel(config, params)


@dataclass
class InteractionEmbedding:
    # one row per set: 1×d for people/scene modes, N×d for mode none
    vectors: np.ndarray

    @property
    def e(self) -> np.ndarray:
        if self.vectors.shape[0] != 1:
            raise ValueError("mode none has one embedding per person; use .vectors")
        return self.vectors[0]


@dataclass
class CorrectionSet:
    delta: np.ndarray


@dataclass
class RefineResult:
    refined: np.ndarray
    embedding: InteractionEmbedding
    corrections: CorrectionSet


@dataclass
class ForwardPass:
    refined: Tensor
    embedding: Tensor
    delta: Tensor


def check_scene(config: ModelConfig, scene: Scene) -> None:
    if scene.n_joints != config.joints:
        raise ShapeError(f"scene '{scene.id}' has {scene.n_joints} joints but the model expects {config.joints}")


def center_persons(persons: np.ndarray, mode: str, root_index: int = 0) -> np.ndarray:
    """Remove the mean root position (per person in mode none, so persons stay decoupled)."""
    if mode == "none":
        return persons - persons[:, root_index:root_index + 1]
    return persons - persons[:, root_index].mean(axis=0)


def _encode_on_tape(config: ModelConfig, weights: Mapping[str, Tensor], tape: Tape,
                    centered: np.ndarray):
    n, j, _ = centered.shape
    P = linear(weights, "person_proj", tape.constant(centered.reshape(n, 3 * j)))
    if config.mode == "people":
        sets = [P]
    elif config.mode == "scene":
        sets = [linear(weights, "joint_proj", tape.constant(centered.reshape(n * j, 3)))]
    else:
        sets = [slice_rows(P, i, i + 1) for i in range(n)]
    return P, sets


def _embed(config: ModelConfig, weights: Mapping[str, Tensor], X: Tensor) -> Tensor:
    for k in range(config.sab_blocks):
        X = sab_forward(AttentionBlock(weights, f"sab{k}", config.heads), X)
    return pma_forward(AttentionBlock(weights, "pma", config.heads), X)


def forward(model: RefinerModel, tape: Tape, scene: Scene,
            weights: Optional[Mapping[str, Tensor]] = None) -> ForwardPass:
    config = model.config
    check_scene(config, scene)
    weights = weights if weights is not None else model.bind(tape)
    n, j, _ = scene.persons.shape

    P, sets = _encode_on_tape(config, weights, tape, center_persons(scene.persons, config.mode, scene.root_index))
    embeddings = [_embed(config, weights, S) for S in sets]
    if config.mode == "none":
        E = concat_rows(embeddings)
        embedding = E
    else:
        embedding = embeddings[0]
        E = repeat_rows(embedding, n)

    hidden = relu(linear(weights, "decoder.hidden", concat_cols([E, P])))
    delta = linear(weights, "decoder.out", hidden)
    refined = add(tape.constant(scene.persons.reshape(n, 3 * j)), delta)
    return ForwardPass(refined=refined, embedding=embedding, delta=delta)


def encode_set(model: RefinerModel, scene: Scene) -> List[np.ndarray]:
    """Set elements after projection: one N×d set (people), one N·J×d set (scene) or N 1×d sets (none)."""
    check_scene(model.config, scene)
    tape = Tape()
    centered = center_persons(scene.persons, model.config.mode, scene.root_index)
    _, sets = _encode_on_tape(model.config, model.bind(tape), tape, centered)
    return [s.data.copy() for s in sets]


def refine(model: RefinerModel, scene: Scene) -> RefineResult:
    n, j, _ = scene.persons.shape
    out = forward(model, Tape(), scene)
    return RefineResult(
        refined=out.refined.data.reshape(n, j, 3),
        embedding=InteractionEmbedding(out.embedding.data.copy()),
        corrections=CorrectionSet(out.delta.data.reshape(n, j, 3)),
    )


def scene_loss(refined: Tensor, gt: np.ndarray) -> Tensor:
    """(1/N) Σ_n ||refined_n - gt_n||², the squared norm taken over all 3J coordinates."""
    n = gt.shape[0]
    target = refined.tape.constant(gt.reshape(refined.shape))
    return scale(sum_squares(sub(refined, target)), 1.0 / n)


def loss(refined: np.ndarray, gt: Optional[np.ndarray]) -> float:
    if gt is None:
        raise SceneValidationError("loss needs ground truth")
    refined = np.asarray(refined, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if refined.shape != gt.shape:
        raise ShapeError(f"loss: refined shape {refined.shape} does not match gt shape {gt.shape}")
    return float(np.sum((refined - gt) ** 2) * (1.0 / gt.shape[0]))
