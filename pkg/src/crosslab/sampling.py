"""Low-resource simulation sampling: treebank downsampling at a fixed 5:1
train/dev ratio, and 50/50 source/target stratified batching."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .conllu import Sentence, Treebank
from .errors import CorpusError
from .rand import make_rng


@dataclass(frozen=True)
class SimulationConfig:
    target_train_size: int  # |D_tau|
    seed: int = 0

    def __post_init__(self):
        if self.target_train_size < 0:
            raise CorpusError("|D_tau| must be nonnegative")

    @property
    def dev_size(self) -> int:
        # 5:1 ratio, ceiling so dev stays nonempty for small |D_tau|;
        # the zero-target setting has no dev trees at all
        if self.target_train_size == 0:
            return 0
        return math.ceil(self.target_train_size / 5)


def downsample(tb: Treebank, cfg: SimulationConfig) -> tuple[Treebank, Treebank]:
    """Seeded disjoint train/dev sample of sizes |D_tau| and ceil(|D_tau|/5)."""
    need = cfg.target_train_size + cfg.dev_size
    if need > len(tb):
        raise CorpusError(
            f"treebank has {len(tb)} sentences; need {need} "
            f"({cfg.target_train_size} train + {cfg.dev_size} dev)")
    rng = make_rng(cfg.seed)
    order = rng.permutation(len(tb))
    train_idx = sorted(order[: cfg.target_train_size].tolist())
    dev_idx = sorted(order[cfg.target_train_size : need].tolist())
    train = Treebank(tuple(tb.sentences[i] for i in train_idx), tb.language, "train")
    dev = Treebank(tuple(tb.sentences[i] for i in dev_idx), tb.language, "dev")
    return train, dev


def stratified_batches(src: Treebank, tgt: Treebank | None, batch_size: int,
                       seed: int = 0) -> Iterator[list[Sentence]]:
    """One epoch of training batches.

    Every full batch holds batch_size/2 source and batch_size/2 target
    sentences. The epoch is defined by the larger treebank; the smaller one
    is resampled with replacement to fill its half of each batch. An empty
    target degrades to plain batching over the source.
    """
    if batch_size < 2 or batch_size % 2 != 0:
        raise CorpusError("batch_size must be even and >= 2")
    if len(src) == 0:
        raise CorpusError("source treebank is empty")
    rng = make_rng(seed)

    if tgt is None or len(tgt) == 0:
        order = rng.permutation(len(src))
        for lo in range(0, len(src), batch_size):
            yield [src.sentences[i] for i in order[lo : lo + batch_size]]
        return

    half = batch_size // 2
    big, small = (src, tgt) if len(src) >= len(tgt) else (tgt, src)
    src_is_big = len(src) >= len(tgt)
    big_order = rng.permutation(len(big))
    for lo in range(0, len(big), half):
        big_part = [big.sentences[i] for i in big_order[lo : lo + half]]
        small_idx = rng.integers(0, len(small), size=len(big_part))
        small_part = [small.sentences[i] for i in small_idx]
        batch = big_part + small_part if src_is_big else small_part + big_part
        yield batch
