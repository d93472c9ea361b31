"""CoNLL-U treebank reading, writing, and tree validation.

Only syntactic words are kept: multiword-token range lines (id "n-m") and
empty-node lines (id "n.m") are skipped, as are comments. Heads must form a
single arborescence rooted at the synthetic node 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CorpusError

N_COLUMNS = 10


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    heads: tuple[int, ...]
    labels: tuple[str, ...]
    language: str = ""

    def __post_init__(self):
        if not (len(self.tokens) == len(self.heads) == len(self.labels)):
            raise CorpusError("tokens, heads, and labels must have equal length")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Treebank:
    sentences: tuple[Sentence, ...]
    language: str = ""
    split: str = "train"

    def __post_init__(self):
        self.sentences = tuple(self.sentences)
        for s in self.sentences:
            if s.language and self.language and s.language != self.language:
                raise CorpusError(
                    f"sentence language {s.language!r} differs from treebank {self.language!r}")

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def check_tree(heads: tuple[int, ...]) -> None:
    """Raise unless heads describe a tree rooted at 0 (no cycles, all
    indices in range, every token reachable from the root)."""
    n = len(heads)
    for i, h in enumerate(heads):
        if not (0 <= h <= n):
            raise CorpusError(f"head {h} out of range for token {i + 1} (n={n})")
        if h == i + 1:
            raise CorpusError(f"token {i + 1} is its own head")
    state = [0] * (n + 1)  # 0 unseen, 1 on path, 2 done
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node - 1]
        if state[node] == 1:
            raise CorpusError(f"cycle through token {node}")
        for p in path:
            state[p] = 2


def read_conllu(text: str, language: str = "", split: str = "train") -> Treebank:
    """Parse CoNLL-U text into a Treebank.

    Rejects malformed token lines and invalid trees, naming the offending
    line and sentence.
    """
    sentences: list[Sentence] = []
    tokens: list[str] = []
    heads: list[int] = []
    labels: list[str] = []
    sent_start_line = 1

    def flush(line_no: int):
        nonlocal tokens, heads, labels, sent_start_line
        if not tokens:
            return
        try:
            check_tree(tuple(heads))
        except CorpusError as e:
            raise CorpusError(
                f"invalid tree: {e} at sentence {len(sentences) + 1} "
                f"(starting line {sent_start_line})") from e
        sentences.append(Sentence(tuple(tokens), tuple(heads), tuple(labels), language))
        tokens, heads, labels = [], [], []
        sent_start_line = line_no + 1

    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise CorpusError(f"line {line_no}: expected {N_COLUMNS} columns, got {len(cols)}")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword range or empty node
        try:
            idx = int(tok_id)
            head = int(cols[6])
        except ValueError as e:
            raise CorpusError(f"line {line_no}: non-integer id or head") from e
        if idx != len(tokens) + 1:
            raise CorpusError(f"line {line_no}: token id {idx} out of sequence")
        tokens.append(cols[1])
        heads.append(head)
        labels.append(cols[7])
    flush(line_no + 1 if text else 1)
    return Treebank(tuple(sentences), language=language, split=split)


def write_conllu(tb: Treebank) -> str:
    """Serialize a Treebank; read_conllu(write_conllu(t)) round-trips exactly."""
    chunks: list[str] = []
    for s in tb.sentences:
        lines = []
        for i, (tok, head, label) in enumerate(zip(s.tokens, s.heads, s.labels), start=1):
            lines.append(f"{i}\t{tok}\t_\t_\t_\t_\t{head}\t{label}\t_\t_")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def load_conllu(path, language: str = "", split: str = "train") -> Treebank:
    with open(path, encoding="utf-8", errors="strict") as f:
        try:
            text = f.read()
        except UnicodeDecodeError as e:
            raise CorpusError(f"{path}: not valid UTF-8 ({e})") from e
    return read_conllu(text, language=language, split=split)


def save_conllu(path, tb: Treebank) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_conllu(tb))
