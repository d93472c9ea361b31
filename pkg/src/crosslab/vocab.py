"""Word and character vocabularies with reserved symbols."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import CorpusError

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
RESERVED_WORDS = (UNK, BOS, EOS)

CHAR_UNK = "<cunk>"
CHAR_BOW = "<bow>"
CHAR_EOW = "<eow>"
CHAR_PAD = "<cpad>"
RESERVED_CHARS = (CHAR_UNK, CHAR_BOW, CHAR_EOW, CHAR_PAD)


@dataclass
class Vocabulary:
    word_to_id: dict[str, int]
    id_to_word: tuple[str, ...]
    char_to_id: dict[str, int]
    id_to_char: tuple[str, ...]
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def n_words(self) -> int:
        return len(self.id_to_word)

    @property
    def n_chars(self) -> int:
        return len(self.id_to_char)

    def word_id(self, word: str) -> int:
        return self.word_to_id.get(word, self.word_to_id[UNK])

    def char_id(self, ch: str) -> int:
        return self.char_to_id.get(ch, self.char_to_id[CHAR_UNK])

    def char_ids(self, word: str, max_chars: int) -> list[int]:
        """Fixed-length character encoding: <bow> chars <eow>, padded.

        The width is constant so a word's encoding never depends on which
        batch it appears in. Words longer than max_chars - 2 are truncated.
        """
        body = [self.char_id(c) for c in word[: max_chars - 2]]
        ids = [self.char_to_id[CHAR_BOW]] + body + [self.char_to_id[CHAR_EOW]]
        ids.extend([self.char_to_id[CHAR_PAD]] * (max_chars - len(ids)))
        return ids

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id


def build_vocab(tokens: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Vocabulary over a token stream: words with count >= min_count plus
    reserved symbols; characters are collected from every token.

    Ids are dense and stable: reserved symbols first, then corpus symbols
    ordered by descending count with lexicographic tie-breaking.
    """
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    word_counts: Counter[str] = Counter()
    char_counts: Counter[str] = Counter()
    for tok in tokens:
        word_counts[tok] += 1
        char_counts.update(tok)

    words = list(RESERVED_WORDS)
    for w, c in sorted(word_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if c >= min_count and w not in RESERVED_WORDS:
            words.append(w)
    chars = list(RESERVED_CHARS)
    for ch, _ in sorted(char_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if ch not in RESERVED_CHARS:
            chars.append(ch)

    return Vocabulary(
        word_to_id={w: i for i, w in enumerate(words)},
        id_to_word=tuple(words),
        char_to_id={c: i for i, c in enumerate(chars)},
        id_to_char=tuple(chars),
        counts=dict(word_counts),
    )
