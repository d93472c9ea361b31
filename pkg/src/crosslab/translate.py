"""Word translation over context-free vectors, scored by cosine or CSLS.

CSLS penalizes cosine similarity by the mean similarity of each endpoint to
its k nearest neighbors on the other side, which counteracts hubs:

    score(x, y) = 2 cos(x, y) - r_T(x) - r_S(y)

where r_T(x) is the mean cosine of query x to its k nearest target vectors
and r_S(y) the mean cosine of target y to its k nearest source vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import BilingualDictionary
from .errors import CorpusError, NumericsError


def _unit_rows(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0):
        raise NumericsError(f"zero vector in {what}")
    return mat / norms[:, None]


def _mean_topk(sims: np.ndarray, k: int) -> np.ndarray:
    """Row-wise mean of the k largest entries."""
    if k >= sims.shape[1]:
        return sims.mean(axis=1)
    part = np.partition(sims, sims.shape[1] - k, axis=1)[:, -k:]
    return part.mean(axis=1)


class RetrievalIndex:
    """Unit-normalized target vectors plus the cached per-target hubness
    penalty r_S for a fixed k."""

    def __init__(self, words, target_vectors, source_vectors, k: int = 10):
        self.words = tuple(words)
        self.matrix = _unit_rows(target_vectors, "target vectors")
        if len(self.words) != self.matrix.shape[0]:
            raise NumericsError("word list and target matrix disagree")
        self.sources = _unit_rows(source_vectors, "source vectors")
        if not (1 <= k <= min(len(self.words), self.sources.shape[0])):
            raise NumericsError(
                f"k={k} out of range for {len(self.words)} targets / "
                f"{self.sources.shape[0]} sources")
        self.k = k
        self.r_src = _mean_topk(self.matrix @ self.sources.T, k)

    def __len__(self) -> int:
        return len(self.words)


def csls_scores(x, index: RetrievalIndex) -> np.ndarray:
    """CSLS score of one query against every target in the index."""
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x)
    if norm == 0:
        raise NumericsError("zero query vector")
    cos = index.matrix @ (x / norm)
    r_tgt = float(np.sort(cos)[-index.k :].mean())
    return 2.0 * cos - r_tgt - index.r_src


def cosine_scores(x, index: RetrievalIndex) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x)
    if norm == 0:
        raise NumericsError("zero query vector")
    return index.matrix @ (x / norm)


@dataclass
class RankedList:
    query: str
    candidates: tuple[tuple[str, float], ...]  # (target word, score), best first

    @property
    def top(self) -> str:
        return self.candidates[0][0]


def translate(queries, index: RetrievalIndex, mode: str = "csls",
              topn: int = 10) -> list[RankedList]:
    """Rank targets for each (word, vector) query. Ties break by target-word
    lexicographic order, so results are deterministic."""
    if mode not in ("csls", "cosine"):
        raise NumericsError(f"unknown retrieval mode {mode!r}")
    if len(index) == 0:
        raise CorpusError("empty retrieval index")
    scorer = csls_scores if mode == "csls" else cosine_scores
    # lexicographic rank as tie-break: stable sort on (-score, word order)
    word_order = np.argsort(np.array(index.words))
    word_rank = np.empty(len(index.words), dtype=np.intp)
    word_rank[word_order] = np.arange(len(index.words))

    out = []
    for word, vec in queries:
        scores = scorer(vec, index)
        order = np.lexsort((word_rank, -scores))[:topn]
        out.append(RankedList(word, tuple((index.words[i], float(scores[i]))
                                          for i in order)))
    return out


@dataclass
class TranslationScore:
    p_at_1: float
    evaluated: int
    skipped: int


def precision_at_1(ranked: list[RankedList],
                   dict_test: BilingualDictionary) -> TranslationScore:
    """Fraction of evaluated sources whose rank-1 candidate is any gold
    target. Test sources absent from the query set are excluded and counted."""
    by_query = {r.query: r for r in ranked}
    gold: dict[str, set[str]] = {}
    for s, t in dict_test.pairs:
        gold.setdefault(s, set()).add(t)
    correct = 0
    evaluated = 0
    skipped = 0
    for source, targets in gold.items():
        r = by_query.get(source)
        if r is None:
            skipped += 1
            continue
        evaluated += 1
        if r.top in targets:
            correct += 1
    if evaluated == 0:
        raise CorpusError("zero evaluable pairs: no test source found in the queries")
    return TranslationScore(correct / evaluated, evaluated, skipped)
