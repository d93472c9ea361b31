"""Word vector tables in the word2vec text format: header "count dim",
then one "word v1 ... vdim" row per line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorpusError


@dataclass
class VectorTable:
    words: tuple[str, ...]
    matrix: np.ndarray  # (n_words, dim)

    def __post_init__(self):
        self.words = tuple(self.words)
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.words):
            raise CorpusError("vector matrix shape does not match word list")
        self._row = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._row

    def __getitem__(self, word: str) -> np.ndarray:
        return self.matrix[self._row[word]]

    def get(self, word: str):
        i = self._row.get(word)
        return None if i is None else self.matrix[i]


def read_vectors(text: str) -> VectorTable:
    lines = text.split("\n")
    header = lines[0].split()
    if len(header) != 2:
        raise CorpusError("line 1: header must be 'count dim'")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as e:
        raise CorpusError("line 1: non-integer header fields") from e
    words: list[str] = []
    rows: list[np.ndarray] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.rstrip().split(" ")
        if len(fields) != dim + 1:
            raise CorpusError(
                f"line {line_no}: expected {dim} values for word {fields[0]!r}, "
                f"got {len(fields) - 1}")
        words.append(fields[0])
        try:
            rows.append(np.array([float(x) for x in fields[1:]]))
        except ValueError as e:
            raise CorpusError(f"line {line_no}: non-numeric vector entry") from e
    if len(words) != count:
        raise CorpusError(f"header declares {count} rows, found {len(words)}")
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return VectorTable(tuple(words), matrix)


def write_vectors(table: VectorTable, precision: int = 6) -> str:
    out = [f"{len(table)} {table.dim}"]
    for w, row in zip(table.words, table.matrix):
        out.append(w + " " + " ".join(f"{x:.{precision}f}" for x in row))
    return "\n".join(out) + "\n"


def load_vectors(path) -> VectorTable:
    with open(path, encoding="utf-8", errors="strict") as f:
        try:
            text = f.read()
        except UnicodeDecodeError as e:
            raise CorpusError(f"{path}: not valid UTF-8 ({e})") from e
    return read_vectors(text)


def save_vectors(path, table: VectorTable, precision: int = 6) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_vectors(table, precision=precision))
