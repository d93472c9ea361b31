"""Arc/label scoring, the training loss, and sentence decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..conllu import Sentence
from ..errors import NumericsError
from .model import NEG, ParserModel
from .mst import mst_decode


@dataclass
class ArcScores:
    """Scores for one sentence: arcs is (n+1, n) with row = candidate head
    (0 = root) and column = dependent; labels is (n+1, n, n_labels)."""

    arcs: Tensor
    labels: Tensor
    label_names: tuple[str, ...]

    def __post_init__(self):
        if not np.all(np.isfinite(self.arcs.data)):
            raise NumericsError("non-finite arc scores")
        n1, n = self.arcs.shape
        if n1 != n + 1 or self.labels.shape[:2] != (n1, n):
            raise NumericsError("inconsistent score shapes")

    @property
    def n_tokens(self) -> int:
        return self.arcs.shape[1]


def biaffine_scores(model: ParserModel, states: Tensor) -> ArcScores:
    """Full scores for a single sentence's encoder states (n+1, 2*lstm)."""
    b1 = ad.reshape(states, (1,) + tuple(states.shape))
    arcs = ad.reshape(model.arc_score_matrix(b1), (states.shape[0], states.shape[0] - 1))

    lh, ld = model._label_mlps(b1)
    n1 = states.shape[0]
    n = n1 - 1
    n_lab = len(model.labels)
    l = model.config.label_mlp
    tmp = ad.reshape(lh @ model.label_bilinear, (1, n1, 1, n_lab, l))
    ld_tok = ad.reshape(ld[:, 1:, :], (1, 1, n, 1, l))
    bilinear = ad.tsum(tmp * ld_tok, axis=4)                      # (1, n1, n, n_lab)
    head_term = ad.reshape(lh @ model.label_head_bias, (1, n1, 1, n_lab))
    labels = bilinear + head_term + model.label_bias
    return ArcScores(arcs, ad.reshape(labels, (n1, n, n_lab)), model.labels)


def _self_arc_mask(n: int) -> np.ndarray:
    mask = np.zeros((n + 1, n))
    for j in range(n):
        mask[j + 1, j] = NEG
    return mask


def parse_loss(scores: ArcScores, gold: Sentence) -> Tensor:
    """Cross-entropy over candidate heads plus cross-entropy over labels at
    the gold head, averaged per token. Self-arcs are excluded from the head
    softmax, so a token in a sentence of n tokens has n candidates."""
    n = scores.n_tokens
    if len(gold) != n:
        raise NumericsError(f"gold sentence length {len(gold)} != scored {n}")
    try:
        gold_labels = np.array([scores.label_names.index(l) for l in gold.labels])
    except ValueError as e:
        raise NumericsError(f"gold label outside the model inventory: {e}") from e
    gold_heads = np.array(gold.heads, dtype=np.intp)

    head_logp = ad.log_softmax(scores.arcs + _self_arc_mask(n), axis=0)
    head_ll = ad.take_along(head_logp, gold_heads[None, :], axis=0).sum()

    at_gold = ad.take_along(scores.labels, gold_heads[None, :, None].repeat(
        len(scores.label_names), axis=2).reshape(1, n, -1), axis=0)
    label_logp = ad.log_softmax(ad.reshape(at_gold, (n, len(scores.label_names))), axis=1)
    label_ll = ad.take_along(label_logp, gold_labels[:, None], axis=1).sum()

    return (head_ll + label_ll) * (-1.0 / n)


# -- batched training loss -----------------------------------------------------


def _pad_batch(model: ParserModel, sentences, embedder):
    b = len(sentences)
    t = max(len(s) for s in sentences)
    d = model.input_dim
    stack = np.zeros((3, b, t, d))
    mask = np.zeros((b, t))
    for i, s in enumerate(sentences):
        layers = embedder.layers(s)  # (3, n, d)
        n = len(s)
        stack[:, i, :n, :] = layers
        mask[i, :n] = 1.0
    return stack, mask


def _arc_mask(mask: np.ndarray) -> np.ndarray:
    """(B, T) token mask -> (B, T+1, T) additive mask hiding padded heads
    and self arcs. The root row is always valid."""
    b, t = mask.shape
    out = np.zeros((b, t + 1, t))
    out[:, 1:, :] += (1.0 - mask[:, :, None]) * NEG  # padded head rows
    for j in range(t):
        out[:, j + 1, j] = NEG                        # self arcs
    return out


def batch_loss(model: ParserModel, sentences, embedder,
               train_rng: np.random.Generator | None = None) -> Tensor:
    """Mean per-token loss over a padded batch; equals the token-weighted
    mean of per-sentence parse_loss values."""
    stack, mask = _pad_batch(model, sentences, embedder)
    b, t = mask.shape
    gold_heads = np.zeros((b, t), dtype=np.intp)
    gold_labels = np.zeros((b, t), dtype=np.intp)
    for i, s in enumerate(sentences):
        gold_heads[i, : len(s)] = s.heads
        for j, lab in enumerate(s.labels):
            idx = model.label_index.get(lab)
            if idx is None:
                raise NumericsError(f"gold label {lab!r} outside the model inventory")
            gold_labels[i, j] = idx

    states = model.encode(ad.Tensor(stack), mask, train_rng)
    arcs = model.arc_score_matrix(states) + _arc_mask(mask)
    head_logp = ad.log_softmax(arcs, axis=1)
    head_ll = ad.take_along(head_logp, gold_heads[:, None, :], axis=1)
    head_sum = (ad.reshape(head_ll, (b, t)) * mask).sum()

    label_scores = model.label_scores_at(states, gold_heads)  # (B, T, L)
    label_logp = ad.log_softmax(label_scores, axis=2)
    label_ll = ad.take_along(label_logp, gold_labels[:, :, None], axis=2)
    label_sum = (ad.reshape(label_ll, (b, t)) * mask).sum()

    return (head_sum + label_sum) * (-1.0 / mask.sum())


# -- decoding -------------------------------------------------------------------


def parse_sentences(model: ParserModel, sentences, embedder,
                    decode: str = "mst", batch_size: int = 32
                    ) -> list[tuple[list[int], list[str]]]:
    """Predict (heads, labels) per sentence. Greedy picks each token's best
    head independently; mst decodes the best single-root arborescence."""
    if decode not in ("greedy", "mst"):
        raise NumericsError(f"unknown decode mode {decode!r}")
    out: list[tuple[list[int], list[str]]] = []
    with ad.no_grad():
        for lo in range(0, len(sentences), batch_size):
            chunk = sentences[lo : lo + batch_size]
            stack, mask = _pad_batch(model, chunk, embedder)
            states = model.encode(ad.Tensor(stack), mask)
            arcs = (model.arc_score_matrix(states) + _arc_mask(mask)).data
            heads = np.zeros(mask.shape, dtype=np.intp)
            for i, s in enumerate(chunk):
                n = len(s)
                if decode == "greedy":
                    heads[i, :n] = arcs[i, : n + 1, :n].argmax(axis=0)
                else:
                    heads[i, :n] = mst_decode(arcs[i, : n + 1, :n])
            label_scores = model.label_scores_at(states, heads).data
            for i, s in enumerate(chunk):
                n = len(s)
                pred = label_scores[i, :n].argmax(axis=1)
                out.append((heads[i, :n].tolist(),
                            [model.labels[k] for k in pred]))
    return out
