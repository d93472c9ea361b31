"""Synthetic bilingual worlds for desk-scale experiments.

A small dependency grammar generates annotated sentences over a lexicon of
pronounceable pseudo-words built from the letters a..m only. A second
language is derived by a deterministic character substitution cipher mapping
a..m onto n..z, so the two languages share syntax and distributional
structure while their surface forms (and even their alphabets) are disjoint.
This gives a controlled setting where crosslingual lexical correspondence is
known exactly: the gold translation of every word is its ciphered form.

Content words are grouped into topics and sentences draw their nouns, verbs,
and modifiers mostly from one topic, so each word carries a distinctive
co-occurrence signature (the signal that distributional alignment needs);
without it, words of one class would be statistically interchangeable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .conllu import Sentence, Treebank
from .dictionary import BilingualDictionary
from .rand import make_rng

_PLAIN = "abcdefghijklm"
_CIPHER = "nopqrstuvwxyz"
_TABLE = str.maketrans(_PLAIN, _CIPHER)

_CONSONANTS = "bcdfghjklm"
_VOWELS = "aei"


def cipher_word(word: str) -> str:
    return word.translate(_TABLE)


def cipher_tokens(tokens: list[str]) -> list[str]:
    return [cipher_word(t) for t in tokens]


def cipher_sentence(s: Sentence, language: str) -> Sentence:
    return Sentence(tuple(cipher_word(t) for t in s.tokens), s.heads, s.labels, language)


def cipher_treebank(tb: Treebank, language: str) -> Treebank:
    return Treebank(tuple(cipher_sentence(s, language) for s in tb.sentences),
                    language, tb.split)


@dataclass
class Lexicon:
    nouns: list[str]
    verbs_t: list[str]   # transitive
    verbs_i: list[str]   # intransitive
    adjectives: list[str]
    adverbs: list[str]
    determiners: list[str]
    adpositions: list[str]
    stop: str
    n_topics: int = 20

    @property
    def all_words(self) -> list[str]:
        return (self.nouns + self.verbs_t + self.verbs_i + self.adjectives
                + self.adverbs + self.determiners + self.adpositions + [self.stop])

    def topic_slice(self, items: list[str], topic: int) -> list[str]:
        return [w for i, w in enumerate(items) if i % self.n_topics == topic]


def make_lexicon(seed: int = 0, n_nouns: int = 300, n_verbs_t: int = 60,
                 n_verbs_i: int = 40, n_adjectives: int = 60, n_adverbs: int = 15,
                 n_determiners: int = 6, n_adpositions: int = 12,
                 n_topics: int = 20) -> Lexicon:
    rng = make_rng(seed)
    seen: set[str] = set()

    def word(n_syllables: int) -> str:
        # CVC syllables: 300 distinct syllable types keep surface forms
        # orthographically distinctive at short lengths
        while True:
            w = "".join(_CONSONANTS[rng.integers(0, len(_CONSONANTS))]
                        + _VOWELS[rng.integers(0, len(_VOWELS))]
                        + _CONSONANTS[rng.integers(0, len(_CONSONANTS))]
                        for _ in range(n_syllables))
            if w not in seen:
                seen.add(w)
                return w

    def batch(count: int, syllables: int) -> list[str]:
        return [word(syllables) for _ in range(count)]

    return Lexicon(
        nouns=batch(n_nouns, 2),
        verbs_t=batch(n_verbs_t, 2),
        verbs_i=batch(n_verbs_i, 2),
        adjectives=batch(n_adjectives, 2),
        adverbs=batch(n_adverbs, 2),
        determiners=batch(n_determiners, 1),
        adpositions=batch(n_adpositions, 1),
        stop=word(1),
        n_topics=n_topics,
    )


def _zipf_pick(rng: np.random.Generator, items: list[str]) -> str:
    weights = 1.0 / np.arange(1, len(items) + 1)
    weights /= weights.sum()
    return items[int(rng.choice(len(items), p=weights))]


def _preferred(anchor: str, pool: list[str], count: int) -> list[str]:
    """Deterministic per-word collocation set: the words `anchor` likes to
    appear with. Gives every content word a distinctive co-occurrence
    signature (selectional preference), which is what distributional
    alignment feeds on."""
    h = int.from_bytes(hashlib.blake2s(anchor.encode("utf-8"), digest_size=8).digest(),
                       "little")
    start = h % len(pool)
    step = 1 + (h // 7) % max(len(pool) - 1, 1)
    return [pool[(start + i * step) % len(pool)] for i in range(min(count, len(pool)))]


class _TopicSampler:
    """Draw content words mostly from one topic's sub-lexicon, preferring
    each anchor word's collocates within it."""

    LEAK = 0.10    # probability of ignoring the sentence topic
    AFFINITY = 0.7  # probability of drawing from the anchor's collocates

    def __init__(self, rng: np.random.Generator, lex: Lexicon):
        self.rng = rng
        self.lex = lex
        self.topic = int(rng.integers(0, lex.n_topics))

    def pick(self, items: list[str], anchor: str | None = None) -> str:
        if anchor is not None and self.rng.random() < self.AFFINITY:
            pool = self.lex.topic_slice(items, self.topic) or items
            return _zipf_pick(self.rng, _preferred(anchor, pool, 3))
        if self.rng.random() >= self.LEAK:
            pool = self.lex.topic_slice(items, self.topic)
            if pool:
                return _zipf_pick(self.rng, pool)
        return _zipf_pick(self.rng, items)


@dataclass
class _Growing:
    tokens: list[str] = field(default_factory=list)
    heads: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def add(self, token: str, head: int, label: str) -> int:
        self.tokens.append(token)
        self.heads.append(head)
        self.labels.append(label)
        return len(self.tokens)  # 1-based index of the new token


def _noun_phrase(g: _Growing, rng, lex: Lexicon, picker: _TopicSampler,
                 head: int, role: str, allow_pp: bool) -> int:
    """Append a noun phrase attached to `head` with relation `role`;
    returns the noun's index. Pre-noun dependents get their head fixed up
    once the noun is placed."""
    start = len(g.tokens)
    n_adj = int(rng.integers(0, 3)) if rng.random() < 0.4 else 0
    if rng.random() < 0.8:
        g.add(_zipf_pick(rng, lex.determiners), -1, "det")
    for _ in range(n_adj):
        g.add(picker.pick(lex.adjectives), -1, "amod")
    noun_idx = g.add(picker.pick(lex.nouns), head, role)
    for i in range(start, noun_idx - 1):
        if g.heads[i] == -1:
            g.heads[i] = noun_idx
    if allow_pp and rng.random() < 0.25:
        case_idx = g.add(_zipf_pick(rng, lex.adpositions), -1, "case")
        inner = _noun_phrase(g, rng, lex, picker, noun_idx, "nmod", allow_pp=False)
        g.heads[case_idx - 1] = inner
    return noun_idx


def sample_sentence(rng: np.random.Generator, lex: Lexicon, language: str) -> Sentence:
    g = _Growing()
    picker = _TopicSampler(rng, lex)
    subj = _noun_phrase(g, rng, lex, picker, -1, "nsubj", allow_pp=rng.random() < 0.3)
    transitive = rng.random() < 0.6
    verb_pool = lex.verbs_t if transitive else lex.verbs_i
    verb_idx = g.add(picker.pick(verb_pool), 0, "root")
    g.heads[subj - 1] = verb_idx
    for i in range(len(g.tokens)):
        if g.heads[i] == -1:
            g.heads[i] = verb_idx
    if transitive:
        _noun_phrase(g, rng, lex, picker, verb_idx, "obj", allow_pp=rng.random() < 0.3)
    if rng.random() < 0.3:
        g.add(picker.pick(lex.adverbs), verb_idx, "advmod")
    if rng.random() < 0.35:
        case_idx = g.add(_zipf_pick(rng, lex.adpositions), -1, "case")
        inner = _noun_phrase(g, rng, lex, picker, verb_idx, "obl", allow_pp=False)
        g.heads[case_idx - 1] = inner
    g.add(lex.stop, verb_idx, "punct")
    return Sentence(tuple(g.tokens), tuple(g.heads), tuple(g.labels), language)


def make_treebank(lex: Lexicon, n_sentences: int, language: str,
                  seed: int, split: str = "train") -> Treebank:
    rng = make_rng(seed)
    sents = tuple(sample_sentence(rng, lex, language) for _ in range(n_sentences))
    return Treebank(sents, language, split)


def make_corpus(lex: Lexicon, n_tokens: int, language: str, seed: int) -> list[str]:
    """Token stream of complete sentences totalling at least n_tokens."""
    rng = make_rng(seed)
    out: list[str] = []
    while len(out) < n_tokens:
        out.extend(sample_sentence(rng, lex, language).tokens)
    return out


def gold_dictionary(words: list[str], source_is_cipher: bool = True,
                    split: str = "train") -> BilingualDictionary:
    """Cipher-language word -> its base-language original (or the reverse)."""
    if source_is_cipher:
        pairs = tuple((cipher_word(w), w) for w in words)
        langs = {"source_language": "bb", "target_language": "aa"}
    else:
        pairs = tuple((w, cipher_word(w)) for w in words)
        langs = {"source_language": "aa", "target_language": "bb"}
    return BilingualDictionary(pairs, split=split, **langs)
