"""Word-vector loading and trainable embedding tables."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .tensor import Rng, Tensor, parameter

logger = logging.getLogger(__name__)

UNK = "<unk>"
PAD_CHAR = "<pad>"
# PAD first, then printable ASCII 0x20-0x7E; UNK is appended by the table
CHAR_VOCAB: tuple = (PAD_CHAR,) + tuple(chr(c) for c in range(0x20, 0x7F))


class EmbeddingFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


@dataclass
class EmbeddingTable:
    vocab: dict
    matrix: Tensor
    unk_row: int
    trainable: bool = True
    lowercase: bool = True

    def __post_init__(self):
        V = self.matrix.shape[0]
        if not 0 <= self.unk_row < V:
            raise ValueError(f"unk_row {self.unk_row} outside [0, {V})")
        if any(not 0 <= i < V for i in self.vocab.values()):
            raise ValueError("vocab index out of range")
        self.matrix.requires_grad = self.trainable

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def lookup(self, token: str) -> int:
        if self.lowercase:
            token = token.lower()
        return self.vocab.get(token, self.unk_row)

    def rows(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.lookup(t) for t in tokens], dtype=np.int64)

    def tokens(self) -> list:
        """Vocabulary in row order, without the UNK row."""
        return [t for t, _ in sorted(self.vocab.items(), key=lambda kv: kv[1])]

    def save(self, path) -> None:
        """Write the non-UNK rows in the text format read by :func:`load_word_embeddings`."""
        toks = self.tokens()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(toks)} {self.dim}\n")
            for tok in toks:
                row = self.matrix.data[self.vocab[tok]]
                fh.write(tok + " " + " ".join(repr(float(v)) for v in row) + "\n")


def load_word_embeddings(path, trainable: bool = False) -> EmbeddingTable:
    """Read ``[V D]`` header (optional) then ``token v1 .. vD`` per line.

    Tokens are lowercased; a later duplicate is dropped with a warning. One UNK
    row holding the mean of all loaded vectors is appended.
    """
    path = Path(path)
    vocab: dict = {}
    rows: list = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise EmbeddingFormatError(path, lineno, f"expected {dim} values, found {len(values)}")
            try:
                vec = [float(v) for v in values]
            except ValueError as exc:
                raise EmbeddingFormatError(path, lineno, str(exc)) from None
            key = token.lower()
            if key in vocab:
                logger.warning("%s:%d: duplicate token %r ignored", path, lineno, token)
                continue
            vocab[key] = len(rows)
            rows.append(vec)
    if not rows:
        raise EmbeddingFormatError(path, 0, "no vectors found")
    mat = np.array(rows, dtype=np.float64)
    mat = np.vstack([mat, mat.mean(axis=0)])
    return EmbeddingTable(vocab, parameter(mat), unk_row=len(rows), trainable=trainable)


def new_random_table(
    vocab: Sequence[str],
    dim: int,
    rng: Rng,
    scale: float = 0.1,
    lowercase: bool = True,
) -> EmbeddingTable:
    """Uniform [-scale, scale] table over ``vocab`` plus a trailing UNK row."""
    if dim <= 0:
        raise ValueError(f"embedding dim must be positive, got {dim}")
    index: dict = {}
    for tok in vocab:
        key = tok.lower() if lowercase else tok
        if key not in index:
            index[key] = len(index)
    mat = rng.uniform(-scale, scale, (len(index) + 1, dim))
    return EmbeddingTable(index, parameter(mat), unk_row=len(index), trainable=True, lowercase=lowercase)


def new_char_table(dim: int, rng: Rng, scale: float = 0.5) -> EmbeddingTable:
    table = new_random_table(CHAR_VOCAB, dim, rng, scale=scale, lowercase=False)
    table.matrix.data[table.vocab[PAD_CHAR]] = 0.0
    return table


def table_from_arrays(tokens: Sequence[str], matrix: np.ndarray, trainable: bool, lowercase: bool = True) -> EmbeddingTable:
    """Rebuild a table whose last row is UNK (used when loading artifacts)."""
    vocab = {t: i for i, t in enumerate(tokens)}
    return EmbeddingTable(vocab, parameter(matrix), unk_row=len(tokens), trainable=trainable, lowercase=lowercase)
