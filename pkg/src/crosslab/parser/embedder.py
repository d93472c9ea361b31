"""Embedder bindings: where the parser's word representations come from.

All variants emit a (3, n, dim) layer stack per sentence. LM parameters are
frozen here by construction: the parser trains its scalar mix and its own
parameters, never the language model or the vector table.
"""

from __future__ import annotations

import numpy as np

from ..align import AlignmentMap
from ..bilm.model import BiLM, bilm_forward
from ..conllu import Sentence
from ..errors import ConfigError
from ..vectors import VectorTable


class LMEmbedder:
    """Contextual layers from a frozen LM, optionally mapped into a hub
    space by per-language alignment maps (hub languages use the identity)."""

    def __init__(self, lm: BiLM, alignments: dict[str, AlignmentMap] | None = None):
        self.lm = lm.freeze()
        self.alignments = dict(alignments or {})
        self.dim = lm.config.layer_dim
        self._cache: dict[tuple, np.ndarray] = {}

    def layers(self, sentence: Sentence) -> np.ndarray:
        key = (sentence.language, sentence.tokens)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        embs = bilm_forward(self.lm, sentence.tokens)
        stack = np.stack([[e.layers[j] for e in embs] for j in range(3)])
        amap = self.alignments.get(sentence.language)
        if amap is not None:
            stack = np.stack([stack[j] @ amap.maps[j].T for j in range(3)])
        self._cache[key] = stack
        return stack


class FrozenVectorEmbedder:
    """Fixed word vectors (e.g. externally trained subword vectors),
    replicated across the three layers so the scalar mix reduces to a
    gamma scaling. Vectors are never updated; out-of-vocabulary words map
    to the zero vector."""

    def __init__(self, tables: dict[str, VectorTable]):
        if not tables:
            raise ConfigError("no vector tables given")
        dims = {t.dim for t in tables.values()}
        if len(dims) != 1:
            raise ConfigError(f"vector tables disagree on dimension: {sorted(dims)}")
        self.tables = dict(tables)
        self.dim = dims.pop()
        self.oov = 0

    def layers(self, sentence: Sentence) -> np.ndarray:
        table = self.tables.get(sentence.language)
        if table is None:
            if len(self.tables) == 1:
                table = next(iter(self.tables.values()))
            else:
                raise ConfigError(f"no vector table for language {sentence.language!r}")
        rows = np.zeros((len(sentence), self.dim))
        for i, w in enumerate(sentence.tokens):
            v = table.get(w)
            if v is None:
                self.oov += 1
            else:
                rows[i] = v
        return np.stack([rows, rows, rows])
