"""Language model training: monolingual or polyglot.

A polyglot run is structurally identical to a monolingual one; the only
difference is that windows from all languages share one vocabulary and are
interleaved round-robin so every batch mixes languages.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import CorpusError
from ..optim import Adagrad
from ..rand import make_rng
from ..vocab import Vocabulary, build_vocab
from .config import LMConfig
from .model import BiLM, chunk_windows

log = logging.getLogger(__name__)


@dataclass
class TrainedLM:
    model: BiLM
    epoch_losses: list[float] = field(default_factory=list)


def _interleave(per_language: list[list[list[str]]]) -> list[list[str]]:
    """Round-robin over language shards so batches mix languages evenly."""
    out: list[list[str]] = []
    cursors = [0] * len(per_language)
    while True:
        progressed = False
        for lang_i, wins in enumerate(per_language):
            if cursors[lang_i] < len(wins):
                out.append(wins[cursors[lang_i]])
                cursors[lang_i] += 1
                progressed = True
        if not progressed:
            return out


def train_lm(corpora: dict[str, list[str]], config: LMConfig,
             vocab: Vocabulary | None = None,
             checkpoint_dir=None) -> TrainedLM:
    """Train a bidirectional LM on one corpus or a mixture.

    corpora maps language code to its token stream. The vocabulary (words and
    characters) is built over all corpora together unless one is supplied, in
    which case every corpus token must be covered by it.
    """
    if not corpora:
        raise CorpusError("no corpora given")
    for lang, toks in corpora.items():
        if not toks:
            raise CorpusError(f"corpus for {lang!r} is empty")

    all_tokens = [t for toks in corpora.values() for t in toks]
    if vocab is None:
        vocab = build_vocab(all_tokens, min_count=config.min_count)
    else:
        missing = sorted({t for t in all_tokens if t not in vocab})
        if missing:
            raise CorpusError(
                f"supplied vocabulary does not cover the corpus "
                f"({len(missing)} missing, e.g. {missing[:3]})")

    rng = make_rng(config.seed)
    model = BiLM(config, vocab, rng)
    opt = Adagrad(model.parameters().values(), lr=config.learning_rate,
                  initial_accumulator=config.adagrad_accumulator)

    per_language = {lang: chunk_windows(list(toks), config.unroll_steps)
                    for lang, toks in corpora.items()}
    losses: list[float] = []
    for epoch in range(config.epochs):
        shuffled = []
        for lang in sorted(per_language):
            wins = list(per_language[lang])
            rng.shuffle(wins)
            shuffled.append(wins)
        epoch_windows = _interleave(shuffled)

        # uniform shapes per batch: group by window length (only tails differ)
        by_len: dict[int, list[list[str]]] = {}
        for w in epoch_windows:
            by_len.setdefault(len(w), []).append(w)

        total, count = 0.0, 0
        for length in sorted(by_len, reverse=True):
            wins = by_len[length]
            for lo in range(0, len(wins), config.batch_size):
                batch = wins[lo : lo + config.batch_size]
                loss = model.window_loss(batch, train_rng=rng)
                value = float(loss.data)
                if not np.isfinite(value):
                    raise CorpusError(f"non-finite LM loss at epoch {epoch}")
                loss.backward()
                opt.step()
                opt.zero_grad()
                total += value * len(batch)
                count += len(batch)
        losses.append(total / count)
        log.info("lm epoch %d/%d loss %.4f", epoch + 1, config.epochs, losses[-1])
        if checkpoint_dir is not None:
            from ..checkpoint import save_lm
            save_lm(f"{checkpoint_dir}/lm-epoch{epoch + 1}.npz", model)

    return TrainedLM(model=model, epoch_losses=losses)


def perplexity(lm: BiLM, tokens) -> float:
    return lm.perplexity(tokens)
