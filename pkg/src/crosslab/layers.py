"""The per-word layered representation shared across modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError


@dataclass(frozen=True)
class LayeredEmbedding:
    """Exactly three equal-width vectors per word: the context-independent
    layer 0 and the two LSTM layers (forward and backward halves
    concatenated)."""

    h0: np.ndarray
    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        if not (self.h0.shape == self.h1.shape == self.h2.shape):
            raise NumericsError("layered embedding requires equal dims across layers")

    @property
    def layers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.h0, self.h1, self.h2)

    @property
    def dim(self) -> int:
        return self.h0.shape[-1]

    def mapped(self, mats) -> "LayeredEmbedding":
        """Apply one linear map per layer (mats is a sequence of 3 square
        matrices acting on column vectors)."""
        h = [m @ v for m, v in zip(mats, self.layers)]
        return LayeredEmbedding(*h)
