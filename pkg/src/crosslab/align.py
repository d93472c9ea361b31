"""Anchor computation and per-layer linear alignment between LM spaces.

Anchors average a word's contextual vectors over every corpus occurrence.
Alignment fits, per layer and independently, the linear map W minimizing
||W H_src - H_tgt||_F over dictionary-paired anchor (or decontextualized)
columns, either unconstrained (least squares) or constrained to be
orthogonal (Procrustes via SVD of H_tgt @ H_src^T).

The same machinery serves three roles: retrofitting monolingual LMs,
refining an already-polyglot LM, and the word-translation probe's fitting
step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .bilm.model import BiLM, bilm_forward
from .dictionary import BilingualDictionary
from .errors import CorpusError, NumericsError
from .layers import LayeredEmbedding
from .linalg import least_squares, procrustes
from .mix import ScalarMix

METHODS = ("procrustes", "least-squares")


@dataclass
class AnchorTable:
    """word -> per-layer mean contextual vector, with occurrence counts."""

    vectors: dict[str, LayeredEmbedding]
    counts: dict[str, int]
    lm_id: str = ""

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> LayeredEmbedding:
        return self.vectors[word]

    def get(self, word: str) -> LayeredEmbedding | None:
        return self.vectors.get(word)


class _KahanMean:
    """Compensated running sums for the 3 layers of one word."""

    __slots__ = ("sums", "comps", "count")

    def __init__(self, dim: int):
        self.sums = np.zeros((3, dim))
        self.comps = np.zeros((3, dim))
        self.count = 0

    def add(self, e: LayeredEmbedding):
        for j, v in enumerate(e.layers):
            y = v - self.comps[j]
            t = self.sums[j] + y
            self.comps[j] = (t - self.sums[j]) - y
            self.sums[j] = t
        self.count += 1

    def mean(self) -> LayeredEmbedding:
        m = self.sums / self.count
        return LayeredEmbedding(m[0], m[1], m[2])


def compute_anchors(lm: BiLM, sentences: Iterable[list[str]], lm_id: str = "") -> AnchorTable:
    """Single streaming pass; exact running means in double precision."""
    acc: dict[str, _KahanMean] = {}
    dim = lm.config.layer_dim
    n_sent = 0
    for sent in sentences:
        if not sent:
            continue
        n_sent += 1
        for word, emb in zip(sent, bilm_forward(lm, sent)):
            slot = acc.get(word)
            if slot is None:
                slot = acc[word] = _KahanMean(dim)
            slot.add(emb)
    if n_sent == 0:
        raise CorpusError("empty corpus: no sentences to anchor")
    words = sorted(acc)
    return AnchorTable(
        vectors={w: acc[w].mean() for w in words},
        counts={w: acc[w].count for w in words},
        lm_id=lm_id,
    )


@dataclass
class AlignmentMap:
    """Per-layer linear transforms from a source LM space into a target
    (hub) LM space."""

    maps: tuple[np.ndarray, np.ndarray, np.ndarray]
    method: str
    source_language: str = ""
    target_language: str = ""
    dictionary_id: str = ""
    usable_pairs: int = 0
    skipped_pairs: int = 0
    rank_deficient: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise NumericsError(f"unknown alignment method {self.method!r}")
        self.maps = tuple(np.asarray(m, dtype=np.float64) for m in self.maps)
        if len(self.maps) != 3:
            raise NumericsError("alignment map needs one matrix per layer")
        if self.method == "procrustes":
            for j, w in enumerate(self.maps):
                if np.abs(w.T @ w - np.eye(w.shape[0])).max() > 1e-8:
                    raise NumericsError(f"layer {j} map is not orthogonal")

    @property
    def dim(self) -> int:
        return self.maps[0].shape[0]

    @classmethod
    def identity(cls, dim: int, **kw) -> "AlignmentMap":
        eye = np.eye(dim)
        return cls((eye, eye.copy(), eye.copy()), "procrustes", **kw)

    def apply(self, e: LayeredEmbedding) -> LayeredEmbedding:
        if e.dim != self.dim:
            raise NumericsError(f"dim mismatch: embedding {e.dim}, map {self.dim}")
        return e.mapped(self.maps)


def fit_alignment(src_table: Mapping[str, LayeredEmbedding] | AnchorTable,
                  tgt_table, dictionary: BilingualDictionary,
                  method: str = "procrustes") -> AlignmentMap:
    """Fit per-layer maps on dictionary pairs present in both tables.

    Pairs with a missing word on either side are skipped and counted; zero
    usable pairs is an error. The unconstrained method flags rank-deficient
    fits (fewer independent pairs than dimensions) and returns the
    minimum-norm solution.
    """
    if method not in METHODS:
        raise NumericsError(f"unknown alignment method {method!r}")
    src_cols: list[LayeredEmbedding] = []
    tgt_cols: list[LayeredEmbedding] = []
    skipped = 0
    for s, t in dictionary.pairs:
        es = src_table.get(s)
        et = tgt_table.get(t)
        if es is None or et is None:
            skipped += 1
            continue
        src_cols.append(es)
        tgt_cols.append(et)
    if not src_cols:
        raise CorpusError(
            f"0 usable pairs: none of the {len(dictionary)} dictionary pairs "
            f"appear in both tables")

    maps = []
    rank_deficient = False
    for j in range(3):
        h_s = np.stack([e.layers[j] for e in src_cols], axis=1)
        h_t = np.stack([e.layers[j] for e in tgt_cols], axis=1)
        if method == "procrustes":
            maps.append(procrustes(h_s, h_t))
        else:
            res = least_squares(h_s, h_t)
            rank_deficient = rank_deficient or res.rank_deficient
            maps.append(res.x)

    return AlignmentMap(tuple(maps), method,
                        source_language=dictionary.source_language,
                        target_language=dictionary.target_language,
                        usable_pairs=len(src_cols), skipped_pairs=skipped,
                        rank_deficient=rank_deficient)


def apply_alignment(e: LayeredEmbedding, amap: AlignmentMap | None,
                    mix: ScalarMix) -> np.ndarray:
    """Mapped mixed representation gamma * sum_j lambda_j W_j h_j.

    amap=None is the target (hub) side: the identity map.
    """
    mapped = e if amap is None else amap.apply(e)
    lam = mix.lambdas()
    gamma = float(mix.gamma.data[0])
    out = np.zeros_like(mapped.h0)
    for j, v in enumerate(mapped.layers):
        out += lam[j] * v
    return gamma * out


# -- serialization ------------------------------------------------------------


def write_alignment(amap: AlignmentMap) -> str:
    lines = [
        f"method {amap.method}",
        f"source {amap.source_language or '-'}",
        f"target {amap.target_language or '-'}",
        f"dictionary {amap.dictionary_id or '-'}",
        f"usable_pairs {amap.usable_pairs}",
        f"skipped_pairs {amap.skipped_pairs}",
        f"rank_deficient {int(amap.rank_deficient)}",
    ]
    for j, w in enumerate(amap.maps):
        lines.append(f"layer {j} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def read_alignment(text: str) -> AlignmentMap:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    head: dict[str, str] = {}
    i = 0
    while i < len(lines) and not lines[i].startswith("layer "):
        key, _, value = lines[i].partition(" ")
        head[key] = value.strip()
        i += 1
    maps = []
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "layer" or len(parts) != 4:
            raise CorpusError(f"bad alignment layer header: {lines[i]!r}")
        rows, cols = int(parts[2]), int(parts[3])
        block = lines[i + 1 : i + 1 + rows]
        if len(block) != rows:
            raise CorpusError("truncated alignment matrix block")
        maps.append(np.array([[float(x) for x in ln.split()] for ln in block]))
        if maps[-1].shape != (rows, cols):
            raise CorpusError("alignment matrix shape mismatch")
        i += 1 + rows
    if len(maps) != 3:
        raise CorpusError(f"expected 3 layer maps, found {len(maps)}")
    def _dash(v): return "" if v == "-" else v
    return AlignmentMap(tuple(maps), head.get("method", "procrustes"),
                        source_language=_dash(head.get("source", "-")),
                        target_language=_dash(head.get("target", "-")),
                        dictionary_id=_dash(head.get("dictionary", "-")),
                        usable_pairs=int(head.get("usable_pairs", 0)),
                        skipped_pairs=int(head.get("skipped_pairs", 0)),
                        rank_deficient=bool(int(head.get("rank_deficient", 0))))


def save_alignment(path, amap: AlignmentMap) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_alignment(amap))


def load_alignment(path) -> AlignmentMap:
    with open(path, encoding="utf-8") as f:
        return read_alignment(f.read())
