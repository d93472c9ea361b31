"""Character-level convolutional word encoder.

A word is rendered as a fixed-width character id sequence (<bow> chars <eow>
plus padding), embedded, convolved at several window widths, relu-activated,
max-pooled over positions, and projected to the LSTM input width. The fixed
width makes the encoding of a word independent of its context or batch.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..vocab import Vocabulary
from .config import LMConfig


class CharCNN:
    def __init__(self, vocab: Vocabulary, config: LMConfig, rng: np.random.Generator):
        self.vocab = vocab
        self.config = config
        d = config.char_dim
        scale = np.sqrt(1.0 / d)
        self.emb = ad.parameter(rng.normal(0.0, scale, size=(vocab.n_chars, d)), "charcnn.emb")
        self.kernels = []
        for w, f in config.conv_layers:
            k = ad.parameter(rng.normal(0.0, np.sqrt(1.0 / (w * d)), size=(w * d, f)),
                             f"charcnn.conv{w}.w")
            b = ad.parameter(np.zeros(f), f"charcnn.conv{w}.b")
            self.kernels.append((w, k, b))
        self.proj_w = ad.parameter(
            rng.normal(0.0, np.sqrt(1.0 / config.n_filters),
                       size=(config.n_filters, config.proj_size)), "charcnn.proj.w")
        self.proj_b = ad.parameter(np.zeros(config.proj_size), "charcnn.proj.b")

    def parameters(self) -> dict[str, Tensor]:
        out = {"charcnn.emb": self.emb}
        for w, k, b in self.kernels:
            out[f"charcnn.conv{w}.w"] = k
            out[f"charcnn.conv{w}.b"] = b
        out["charcnn.proj.w"] = self.proj_w
        out["charcnn.proj.b"] = self.proj_b
        return out

    def char_matrix(self, words: list[str]) -> np.ndarray:
        mc = self.config.max_chars
        return np.array([self.vocab.char_ids(w, mc) for w in words], dtype=np.intp)

    def encode_ids(self, ids: np.ndarray) -> Tensor:
        """(N, max_chars) char ids -> (N, proj_size)."""
        n = ids.shape[0]
        x = ad.rows(self.emb, ids)  # (N, L, d)
        pooled = []
        for w, k, b in self.kernels:
            win = ad.unfold(x, w, axis=1)                       # (N, P, w, d)
            flat = ad.reshape(win, (n, win.shape[1], w * self.config.char_dim))
            conv = ad.relu(flat @ k + b)                        # (N, P, F)
            pooled.append(ad.tmax(conv, axis=1))                # (N, F)
        feats = ad.concat(pooled, axis=1)
        return feats @ self.proj_w + self.proj_b

    def encode_words(self, words: list[str]) -> Tensor:
        return self.encode_ids(self.char_matrix(words))


def char_cnn_encode(cnn: CharCNN, word: str) -> np.ndarray:
    """Context-free vector for one word (deterministic given parameters)."""
    with ad.no_grad():
        return cnn.encode_words([word]).data[0]
