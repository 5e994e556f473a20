from typing import Callable

import numpy as np

from autodiff.tensor import Tape, Tensor

DEFAULT_STEP = 1e-5
DEFAULT_FLOOR = 1e-5


def grad_check(f: Callable[[Tape, Tensor], Tensor], point: np.ndarray,
               h: float = DEFAULT_STEP, floor: float = DEFAULT_FLOOR) -> float:
    """
    Compare the tape gradient of scalar `f` at `point` against central finite
    differences, coordinate by coordinate.

    `f(tape, x)` must build its graph on `tape` from the leaf `x` and return a
    one-element tensor. Returns max |analytic - numeric| / max(|analytic|, |numeric|, floor).
    """
    point = np.array(point, dtype=np.float64)
    tape = Tape()
    x = tape.parameter(point)
    out = f(tape, x)
    tape.backward(out)
    analytic = x.grad if x.grad is not None else np.zeros_like(point)

    def evaluate(p: np.ndarray) -> float:
        t = Tape()
        return float(f(t, t.parameter(p)).data[0])

    worst = 0.0
    for idx in np.ndindex(point.shape):
        plus = point.copy()
        minus = point.copy()
        plus[idx] += h
        minus[idx] -= h
        numeric = (evaluate(plus) - evaluate(minus)) / (2.0 * h)
        a = analytic[idx]
        err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
        worst = max(worst, err)
    return worst
