"""Trainable scalar mix of the three LM layers: gamma * sum_j lambda_j h_j
with softmax-normalized lambda."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import NumericsError
from .layers import LayeredEmbedding


class ScalarMix:
    def __init__(self, init_weights=(0.0, 0.0, 0.0), gamma: float = 1.0,
                 prefix: str = "mix"):
        self.raw = ad.parameter(np.asarray(init_weights, dtype=np.float64), f"{prefix}.raw")
        self.gamma = ad.parameter(np.array([float(gamma)]), f"{prefix}.gamma")
        if self.raw.data.shape != (3,):
            raise NumericsError("scalar mix expects exactly 3 raw weights")

    def parameters(self) -> dict[str, Tensor]:
        return {self.raw.name: self.raw, self.gamma.name: self.gamma}

    def lambdas(self) -> np.ndarray:
        with ad.no_grad():
            return ad.softmax(self.raw, axis=0).data

    def combine(self, layer_stack: Tensor) -> Tensor:
        """layer_stack has the 3 layers on its first axis; returns the
        gamma-scaled convex combination over that axis."""
        if layer_stack.shape[0] != 3:
            raise NumericsError("layer stack must have 3 layers on axis 0")
        lam = ad.softmax(self.raw, axis=0)
        shape = (3,) + (1,) * (layer_stack.ndim - 1)
        weighted = layer_stack * ad.reshape(lam, shape)
        return ad.tsum(weighted, axis=0) * ad.reshape(self.gamma, (1,) * (layer_stack.ndim - 1))


def scalar_mix(e: LayeredEmbedding, mix: ScalarMix) -> Tensor:
    """Mix one word's layers into a single vector."""
    if not (e.h0.shape == e.h1.shape == e.h2.shape):
        raise NumericsError("layer dimension mismatch")
    stack = ad.Tensor(np.stack(e.layers))
    return mix.combine(stack)
