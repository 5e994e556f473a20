"""
Set attention blocks without dropout or positional encoding.

    MAB(X, Y) = LayerNorm(H + rFF(H)),  H = LayerNorm(X + Multihead(X, Y, Y))
    SAB(X)    = MAB(X, X)
    PMA(Z)    = MAB(S, rFF(Z))          S: one learnable seed row

Weights live in a flat name -> Tensor mapping; a block only knows its prefix.
"""
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np

from autodiff.tensor import (Tensor, add, concat_cols, layer_norm, matmul, relu, scale, slice_cols,
                             softmax_rows, transpose)

# name -> (shape, kind); kind is one of "weight", "bias", "gain", "seed"
ParameterShapes = Dict[str, Tuple[Tuple[int, ...], str]]


def linear_shapes(prefix: str, fan_in: int, fan_out: int) -> ParameterShapes:
    return {
        f"{prefix}.weight": ((fan_in, fan_out), "weight"),
        f"{prefix}.bias": ((fan_out,), "bias"),
    }


def row_ff_shapes(prefix: str, d: int) -> ParameterShapes:
    shapes = linear_shapes(f"{prefix}.ff1", d, d)
    shapes.update(linear_shapes(f"{prefix}.ff2", d, d))
    return shapes


def mab_shapes(prefix: str, d: int) -> ParameterShapes:
    shapes: ParameterShapes = {}
    for proj in ("q", "k", "v", "o"):
        shapes.update(linear_shapes(f"{prefix}.{proj}", d, d))
    for ln in ("ln1", "ln2"):
        shapes[f"{prefix}.{ln}.gain"] = ((d,), "gain")
        shapes[f"{prefix}.{ln}.bias"] = ((d,), "bias")
    shapes.update(row_ff_shapes(prefix, d))
    return shapes


def pma_shapes(prefix: str, d: int) -> ParameterShapes:
    shapes: ParameterShapes = {f"{prefix}.seed": ((1, d), "seed")}
    shapes.update(row_ff_shapes(f"{prefix}.pool", d))
    shapes.update(mab_shapes(prefix, d))
    return shapes


def linear(weights: Mapping[str, Tensor], prefix: str, x: Tensor) -> Tensor:
    return add(matmul(x, weights[f"{prefix}.weight"]), weights[f"{prefix}.bias"])


def row_ff(weights: Mapping[str, Tensor], prefix: str, x: Tensor) -> Tensor:
    return linear(weights, f"{prefix}.ff2", relu(linear(weights, f"{prefix}.ff1", x)))


@dataclass
class AttentionBlock:
    weights: Mapping[str, Tensor]
    prefix: str
    heads: int

    def multihead(self, X: Tensor, Y: Tensor) -> Tensor:
        Q = linear(self.weights, f"{self.prefix}.q", X)
        K = linear(self.weights, f"{self.prefix}.k", Y)
        V = linear(self.weights, f"{self.prefix}.v", Y)
        d = Q.shape[1]
        head_dim = d // self.heads
        outputs = []
        for h in range(self.heads):
            lo, hi = h * head_dim, (h + 1) * head_dim
            Qh, Kh, Vh = slice_cols(Q, lo, hi), slice_cols(K, lo, hi), slice_cols(V, lo, hi)
            scores = scale(matmul(Qh, transpose(Kh)), 1.0 / np.sqrt(head_dim))
            outputs.append(matmul(softmax_rows(scores), Vh))
        return linear(self.weights, f"{self.prefix}.o", concat_cols(outputs))

    def mab(self, X: Tensor, Y: Tensor) -> Tensor:
        w, p = self.weights, self.prefix
        H = layer_norm(add(X, self.multihead(X, Y)), w[f"{p}.ln1.gain"], w[f"{p}.ln1.bias"])
        return layer_norm(add(H, row_ff(w, p, H)), w[f"{p}.ln2.gain"], w[f"{p}.ln2.bias"])


def sab_forward(block: AttentionBlock, X: Tensor) -> Tensor:
    """M×d -> M×d, permutation-equivariant in the rows of X."""
    return block.mab(X, X)


def pma_forward(block: AttentionBlock, Z: Tensor) -> Tensor:
    """M×d -> 1×d, invariant to the row order of Z."""
    seed = block.weights[f"{block.prefix}.seed"]
    return block.mab(seed, row_ff(block.weights, f"{block.prefix}.pool", Z))
