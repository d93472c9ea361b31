"""Attachment scoring: UAS and LAS, micro-averaged over tokens."""

from __future__ import annotations

from dataclasses import dataclass

from ..conllu import Treebank
from ..errors import CorpusError


@dataclass
class ParseScore:
    uas: float  # percent
    las: float  # percent
    n_tokens: int
    correct_heads: int
    correct_labeled: int

    def __str__(self) -> str:
        return f"UAS {self.uas:.2f} LAS {self.las:.2f}"


def evaluate(pred: Treebank, gold: Treebank) -> ParseScore:
    """Percentage of tokens with the correct head (UAS) and with the correct
    head and label (LAS). Assumes gold segmentation: sentence and token
    counts must match. Labels unknown to the predictor simply score as
    incorrect."""
    if len(pred) != len(gold):
        raise CorpusError(
            f"sentence count mismatch: {len(pred)} predicted vs {len(gold)} gold")
    n = heads_ok = labeled_ok = 0
    for i, (p, g) in enumerate(zip(pred.sentences, gold.sentences)):
        if len(p) != len(g):
            raise CorpusError(
                f"token count mismatch at sentence {i + 1}: {len(p)} vs {len(g)}")
        for ph, pl, gh, gl in zip(p.heads, p.labels, g.heads, g.labels):
            n += 1
            if ph == gh:
                heads_ok += 1
                if pl == gl:
                    labeled_ok += 1
    if n == 0:
        raise CorpusError("empty treebanks")
    return ParseScore(100.0 * heads_ok / n, 100.0 * labeled_ok / n,
                      n, heads_ok, labeled_ok)
