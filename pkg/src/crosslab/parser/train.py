"""Parser training with parameter sharing across languages.

One parser serves every training language: batches are stratified 50/50
between merged source treebanks and the (optional) target treebank, the
label inventory is the union over training data, and early stopping watches
dev LAS. In the zero-target setting there are no target trees, so batching
degrades to source-only and the dev set comes from the source language.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..conllu import Sentence, Treebank
from ..errors import ConfigError, CorpusError
from ..optim import Adam
from ..rand import make_rng
from ..sampling import stratified_batches
from .metrics import ParseScore, evaluate
from .model import ParserConfig, ParserModel
from .scoring import batch_loss, parse_sentences

log = logging.getLogger(__name__)


@dataclass
class TrainedParser:
    model: ParserModel
    dev_history: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_las: float = 0.0


def merge_treebanks(banks: list[Treebank]) -> Treebank:
    sents: list[Sentence] = []
    for tb in banks:
        sents.extend(tb.sentences)
    langs = {tb.language for tb in banks}
    return Treebank(tuple(sents), langs.pop() if len(langs) == 1 else "", "train")


def label_inventory(banks: list[Treebank]) -> tuple[str, ...]:
    labels = {l for tb in banks for s in tb for l in s.labels}
    return tuple(sorted(labels))


def train_parser(sources: list[Treebank], target: Treebank | None,
                 dev: Treebank, embedder, config: ParserConfig) -> TrainedParser:
    """Train on source treebank(s) plus an optional target treebank.

    sources may hold any number of treebanks (multi-source transfer); target
    None or empty is the zero-target mode. Deterministic under config.seed.
    """
    if not sources and (target is None or len(target) == 0):
        raise CorpusError("no training treebanks")
    if not sources:
        # target-only (monolingual) training: treat the target as the source
        sources, target = [target], None
    src = merge_treebanks(sources)
    if len(src) == 0:
        raise CorpusError("empty training data")
    if target is not None and len(target) == 0:
        target = None
    if dev is None or len(dev) == 0:
        raise CorpusError("empty dev treebank")

    train_banks = [src] + ([target] if target is not None else [])
    labels = label_inventory(train_banks)
    model = ParserModel(config, labels, embedder.dim, make_rng(config.seed))
    params = model.parameters()
    opt = Adam(params.values(), lr=config.learning_rate,
               beta1=config.adam_beta1, beta2=config.adam_beta2)
    rng = make_rng(config.seed + 1)

    best: dict[str, np.ndarray] | None = None
    best_las = -1.0
    best_epoch = -1
    history: list[float] = []
    for epoch in range(config.epochs):
        batch_seed = int(rng.integers(0, 2**31 - 1))
        for batch in stratified_batches(src, target, config.batch_size, seed=batch_seed):
            loss = batch_loss(model, batch, embedder, train_rng=rng)
            if not np.isfinite(float(loss.data)):
                raise CorpusError(f"non-finite parser loss at epoch {epoch}")
            loss.backward()
            opt.step()
            opt.zero_grad()

        score = score_treebank(model, embedder, dev, decode=config.dev_decode)
        history.append(score.las)
        log.info("parser epoch %d/%d dev %s", epoch + 1, config.epochs, score)
        if score.las > best_las:
            best_las = score.las
            best_epoch = epoch
            best = {name: p.data.copy() for name, p in params.items()}
        elif epoch - best_epoch >= config.patience:
            break

    if best is not None:
        for name, p in params.items():
            p.data = best[name]
    return TrainedParser(model, history, best_epoch, best_las)


def parse_treebank(model: ParserModel, embedder, tb: Treebank,
                   decode: str = "mst") -> Treebank:
    """Re-annotate a treebank with predicted heads and labels."""
    preds = parse_sentences(model, tb.sentences, embedder, decode=decode)
    sents = [
        Sentence(s.tokens, tuple(heads), tuple(labels), s.language)
        for s, (heads, labels) in zip(tb.sentences, preds)
    ]
    return Treebank(tuple(sents), tb.language, tb.split)


def score_treebank(model: ParserModel, embedder, gold: Treebank,
                   decode: str = "mst") -> ParseScore:
    return evaluate(parse_treebank(model, embedder, gold, decode=decode), gold)
