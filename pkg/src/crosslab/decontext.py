"""Distill a trained LM into context-free word-type vectors.

Each LSTM cell is evaluated exactly once per word with its recurrent inputs
held at zero, so the result depends on the word alone, never on a corpus:

    i = sigmoid(W_i x + b_i)      f = sigmoid(W_f x + b_f)
    c~ = tanh(W_c x + b_c)        o = sigmoid(W_o x + b_o)
    c = i * c~                    h = o * tanh(c)

Projection and skip connections are applied exactly as in the contextual
forward pass, so a word's decontextualized vectors equal its contextual ones
in a single-token sentence, bit for bit.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import autodiff as ad
from .bilm.model import DIRECTIONS, BiLM
from .errors import CorpusError
from .layers import LayeredEmbedding
from .vectors import VectorTable, load_vectors, save_vectors

LAYER_SUFFIXES = (".l0", ".l1", ".l2")


def decontextualize(lm: BiLM, word: str) -> LayeredEmbedding:
    """Context-free layered vectors for one word under a trained LM."""
    with ad.no_grad():
        x = ad.Tensor(lm._cnn_single(word)[None, :])
        halves: dict[str, list[np.ndarray]] = {}
        for d in DIRECTIONS:
            cell1 = lm.cells[(d, 0)]
            h1, _ = cell1.step(x, *cell1.zero_state(1))
            in2 = h1 + x if (lm.config.skip_connections and lm.config.decontext_layer_skip) else h1
            cell2 = lm.cells[(d, 1)]
            h2, _ = cell2.step(in2, *cell2.zero_state(1))
            halves[d] = [h1.data[0], h2.data[0]]
        xv = x.data[0]
        return LayeredEmbedding(
            np.concatenate([xv, xv]),
            np.concatenate([halves["fwd"][0], halves["bwd"][0]]),
            np.concatenate([halves["fwd"][1], halves["bwd"][1]]),
        )


@dataclass
class DecontextTable:
    vectors: dict[str, LayeredEmbedding]
    lm_id: str = ""
    min_count: int = 3

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> LayeredEmbedding:
        return self.vectors[word]

    def __iter__(self) -> Iterator[str]:
        return iter(self.vectors)

    def get(self, word: str) -> LayeredEmbedding | None:
        return self.vectors.get(word)

    @property
    def dim(self) -> int:
        first = next(iter(self.vectors.values()))
        return first.dim

    def layer_matrix(self, layer: int, words: Iterable[str] | None = None
                     ) -> tuple[tuple[str, ...], np.ndarray]:
        ws = tuple(words) if words is not None else tuple(self.vectors)
        mat = np.stack([self.vectors[w].layers[layer] for w in ws])
        return ws, mat


def decontextualize_vocab(lm: BiLM, tokens: Iterable[str],
                          min_count: int = 3, lm_id: str = "") -> DecontextTable:
    """Table over every word appearing at least min_count times in the
    stream. Single pass per word; no recurrent computation."""
    counts = Counter(tokens)
    if not counts:
        raise CorpusError("empty corpus")
    keep = sorted(w for w, c in counts.items() if c >= min_count)
    if not keep:
        raise CorpusError(f"no words with count >= {min_count}")
    vectors = {w: decontextualize(lm, w) for w in keep}
    return DecontextTable(vectors, lm_id=lm_id, min_count=min_count)


def save_table(prefix: str, table: DecontextTable, precision: int = 8) -> None:
    """Write one word-vector text file per layer: prefix.l0 / .l1 / .l2."""
    words = tuple(table.vectors)
    for layer, suffix in enumerate(LAYER_SUFFIXES):
        _, mat = table.layer_matrix(layer, words)
        save_vectors(prefix + suffix, VectorTable(words, mat), precision=precision)


def load_table(prefix: str, min_count: int = 3, lm_id: str = "") -> DecontextTable:
    per_layer = [load_vectors(prefix + s) for s in LAYER_SUFFIXES]
    words = per_layer[0].words
    for t in per_layer[1:]:
        if t.words != words:
            raise CorpusError(f"{prefix}: layer files disagree on the word list")
    vectors = {
        w: LayeredEmbedding(per_layer[0].matrix[i], per_layer[1].matrix[i],
                            per_layer[2].matrix[i])
        for i, w in enumerate(words)
    }
    return DecontextTable(vectors, lm_id=lm_id, min_count=min_count)
