"""Versioned, self-describing model checkpoints (npz with a JSON header)."""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .vocab import Vocabulary

FORMAT_VERSION = 1


def save_checkpoint(path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    header = {"version": FORMAT_VERSION, "kind": kind, **meta}
    np.savez_compressed(path, __header__=np.frombuffer(
        json.dumps(header).encode("utf-8"), dtype=np.uint8), **arrays)


def load_checkpoint(path, kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    with np.load(path) as data:
        if "__header__" not in data:
            raise ConfigError(f"{path}: not a crosslab checkpoint (missing header)")
        header = json.loads(bytes(data["__header__"]).decode("utf-8"))
        arrays = {k: data[k] for k in data.files if k != "__header__"}
    if header.get("version") != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
    if header.get("kind") != kind:
        raise ConfigError(f"{path}: checkpoint kind {header.get('kind')!r}, expected {kind!r}")
    return header, arrays


def _vocab_meta(vocab: Vocabulary) -> dict:
    return {
        "words": list(vocab.id_to_word),
        "chars": list(vocab.id_to_char),
        "counts": vocab.counts,
    }


def _vocab_from_meta(meta: dict) -> Vocabulary:
    words = tuple(meta["words"])
    chars = tuple(meta["chars"])
    return Vocabulary(
        word_to_id={w: i for i, w in enumerate(words)},
        id_to_word=words,
        char_to_id={c: i for i, c in enumerate(chars)},
        id_to_char=chars,
        counts={k: int(v) for k, v in meta.get("counts", {}).items()},
    )


def save_lm(path, lm) -> None:
    arrays = {name: p.data for name, p in lm.parameters().items()}
    meta = {"config": lm.config.to_dict(), "vocab": _vocab_meta(lm.vocab)}
    save_checkpoint(path, "bilm", meta, arrays)


def load_lm(path):
    from .bilm.config import LMConfig
    from .bilm.model import BiLM
    from .rand import make_rng

    header, arrays = load_checkpoint(path, "bilm")
    config = LMConfig.from_dict(header["config"])
    vocab = _vocab_from_meta(header["vocab"])
    lm = BiLM(config, vocab, make_rng(0))
    params = lm.parameters()
    missing = set(params) - set(arrays)
    if missing:
        raise ConfigError(f"{path}: checkpoint missing tensors {sorted(missing)[:3]}")
    for name, p in params.items():
        arr = arrays[name]
        if arr.shape != p.data.shape:
            raise ConfigError(
                f"{path}: shape mismatch for {name}: {arr.shape} vs {p.data.shape}")
        p.data = arr.astype(np.float64)
    return lm.freeze()


def save_parser(path, model, embedder_meta: dict | None = None) -> None:
    arrays = {name: p.data for name, p in model.parameters().items()}
    meta = {
        "config": model.config.to_dict(),
        "labels": list(model.labels),
        "input_dim": model.input_dim,
        "embedder": embedder_meta or {},
    }
    save_checkpoint(path, "parser", meta, arrays)


def load_parser(path):
    from .parser.model import ParserConfig, ParserModel
    from .rand import make_rng

    header, arrays = load_checkpoint(path, "parser")
    config = ParserConfig.from_dict(header["config"])
    model = ParserModel(config, tuple(header["labels"]), int(header["input_dim"]),
                        make_rng(0))
    params = model.parameters()
    missing = set(params) - set(arrays)
    if missing:
        raise ConfigError(f"{path}: checkpoint missing tensors {sorted(missing)[:3]}")
    for name, p in params.items():
        arr = arrays[name]
        if arr.shape != p.data.shape:
            raise ConfigError(
                f"{path}: shape mismatch for {name}: {arr.shape} vs {p.data.shape}")
        p.data = arr.astype(np.float64)
    return model, header.get("embedder", {})
