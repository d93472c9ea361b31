"""Bilingual dictionaries in the two-column text format (MUSE style)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CorpusError


@dataclass
class BilingualDictionary:
    pairs: tuple[tuple[str, str], ...]
    split: str = "train"
    source_language: str = ""
    target_language: str = ""

    def __post_init__(self):
        self.pairs = tuple(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def sources(self) -> tuple[str, ...]:
        seen, out = set(), []
        for s, _ in self.pairs:
            if s not in seen:
                seen.add(s)
                out.append(s)
        return tuple(out)

    def targets_for(self, source: str) -> tuple[str, ...]:
        return tuple(t for s, t in self.pairs if s == source)


def read_dictionary(text: str, direction: str = "forward", split: str = "train",
                    source_language: str = "", target_language: str = "") -> BilingualDictionary:
    """One "source target" pair per line, space- or tab-separated.

    Preserves line order, drops exact duplicates, keeps multiple targets per
    source. direction="reverse" swaps the columns.
    """
    if direction not in ("forward", "reverse"):
        raise CorpusError(f"unknown direction {direction!r}")
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 2:
            raise CorpusError(f"line {line_no}: expected 2 fields, got {len(fields)}")
        src, tgt = fields
        if direction == "reverse":
            src, tgt = tgt, src
        if not src or not tgt:
            raise CorpusError(f"line {line_no}: empty word")
        if (src, tgt) not in seen:
            seen.add((src, tgt))
            pairs.append((src, tgt))
    if direction == "reverse":
        source_language, target_language = target_language, source_language
    return BilingualDictionary(tuple(pairs), split=split,
                               source_language=source_language,
                               target_language=target_language)


def load_dictionary(path, direction: str = "forward", split: str = "train",
                    source_language: str = "", target_language: str = "") -> BilingualDictionary:
    with open(path, encoding="utf-8", errors="strict") as f:
        try:
            text = f.read()
        except UnicodeDecodeError as e:
            raise CorpusError(f"{path}: not valid UTF-8 ({e})") from e
    return read_dictionary(text, direction=direction, split=split,
                           source_language=source_language, target_language=target_language)
