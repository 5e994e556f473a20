import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np

from autodiff.tensor import Tape
from pose_refiners.refiner import RefinerModel, forward, parameter_count
from scene_data.scene import Scene
from utils.errors import NumericError, UsageError

TIMING_REPEATS = 20


@dataclass
class CostReport:
    parameters: int
    flops: int
    n_persons: int
    joints: int
    wall_clock_ms: Optional[float] = None
    flops_by_op: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def dummy_scene(n_persons: int, joints: int, seed: int = 0) -> Scene:
    rng = np.random.default_rng(seed)
    persons = rng.normal(scale=0.3, size=(n_persons, joints, 3))
    persons[:, :, 2] += 5.0
    return Scene(id=f"cost_scene_{n_persons}x{joints}", persons=persons)


def count_flops(model: RefinerModel, scene: Scene) -> Counter:
    """FLOPs of one refine call, grouped by op kind."""
    tape = Tape()
    forward(model, tape, scene)
    by_op = Counter()
    for node in tape.nodes:
        by_op[node.op] += node.flops
    return by_op


def time_refine(model: RefinerModel, scene: Scene, repeats: int = TIMING_REPEATS) -> float:
    """Median wall clock of a refine call in milliseconds."""
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        forward(model, Tape(), scene)
        samples.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(samples))


def count_cost(model: RefinerModel, n_persons: int, joints: Optional[int] = None,
               timing: bool = True, seed: int = 0) -> CostReport:
    joints = joints if joints is not None else model.config.joints
    if n_persons < 1:
        raise UsageError(f"persons must be >= 1, got {n_persons}")
    scene = dummy_scene(n_persons, joints, seed)
    by_op = count_flops(model, scene)

    parameters = model.parameter_count
    expected = parameter_count(model.config)
    if parameters != expected:
        raise NumericError(f"model stores {parameters} parameters but its config implies {expected}")
    return CostReport(
        parameters=parameters,
        flops=int(sum(by_op.values())),
        n_persons=n_persons,
        joints=joints,
        wall_clock_ms=time_refine(model, scene) if timing else None,
        flops_by_op={op: int(v) for op, v in sorted(by_op.items()) if v},
    )
