"""Character-level word representations: max-pooled CNN and bidirectional LSTM."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..embeddings import PAD_CHAR, EmbeddingTable
from ..nn import init_bilstm, lstm_scan, window_indices
from ..tensor import Rng, Tensor, concat, glorot, parameter, take_rows


def char_ids(words: Sequence[str], table: EmbeddingTable, min_len: int = 1) -> tuple:
    """Right-padded char index matrix [N, n] and lengths; n >= ``min_len``."""
    lengths = np.array([max(len(w), 1) for w in words], dtype=np.int64)
    n = max(int(lengths.max()), min_len)
    pad = table.vocab[PAD_CHAR]
    ids = np.full((len(words), n), pad, dtype=np.int64)
    for r, w in enumerate(words):
        for c, ch in enumerate(w):
            ids[r, c] = table.lookup(ch)
    return ids, lengths


def _char_vectors(table: EmbeddingTable, ids: np.ndarray) -> Tensor:
    # PAD positions are multiplied by zero so PAD stays exactly zero and gets no gradient
    emb = take_rows(table.matrix, ids)
    keep = (ids != table.vocab[PAD_CHAR]).astype(np.float64)
    return emb * Tensor(np.repeat(keep[:, :, None], table.dim, axis=2))


class CharCNN:
    """Convolution over char embeddings (zero PAD to kernel width), max-pooled over windows."""

    def __init__(self, params: dict, table: EmbeddingTable, filters: int = 300, kernel: int = 5,
                 rng: Rng = None, prefix: str = "char_cnn", init: bool = True):
        self.params, self.table, self.filters, self.kernel, self.prefix = params, table, filters, kernel, prefix
        if init:
            fan_in = kernel * table.dim
            params[f"{prefix}.W"] = parameter(glorot(rng, fan_in, filters))
            params[f"{prefix}.b"] = parameter(np.zeros(filters))

    @property
    def out_dim(self) -> int:
        return self.filters

    def __call__(self, words: Sequence[str]) -> Tensor:
        k, C = self.kernel, self.table.dim
        ids, lengths = char_ids(words, self.table, min_len=k)
        N, n = ids.shape
        x = _char_vectors(self.table, ids).reshape(N * n, C)
        n_win = n - k + 1
        win = take_rows(x, window_indices(N, n, k)).reshape(N * n_win, k * C)
        W, b = self.params[f"{self.prefix}.W"], self.params[f"{self.prefix}.b"]
        conv = (win @ W + b.expand(N * n_win, self.filters)).reshape(N, n_win, self.filters)
        # windows lying wholly in the padding beyond max(len, k) are excluded from the max
        last_start = np.maximum(lengths, k) - k
        invalid = np.arange(n_win)[None, :] > last_start[:, None]
        if invalid.any():
            mask = np.where(invalid, -np.inf, 0.0)
            conv = conv + Tensor(np.repeat(mask[:, :, None], self.filters, axis=2))
        return conv.max(axis=1)

    def word_features(self, word: str) -> Tensor:
        return self([word]).reshape(self.filters)


class CharLSTM:
    """Bi-LSTM over chars; final forward state concatenated with final backward state."""

    def __init__(self, params: dict, table: EmbeddingTable, hidden: int = 25,
                 rng: Rng = None, prefix: str = "char_lstm", init: bool = True):
        self.params, self.table, self.hidden, self.prefix = params, table, hidden, prefix
        if init:
            init_bilstm(params, prefix, table.dim, hidden, rng)

    @property
    def out_dim(self) -> int:
        return 2 * self.hidden

    def __call__(self, words: Sequence[str]) -> Tensor:
        ids, lengths = char_ids(words, self.table)
        N, n = ids.shape
        mask = np.arange(n)[None, :] < lengths[:, None]
        rev = ids.copy()
        for r, ln in enumerate(lengths):
            rev[r, :ln] = ids[r, :ln][::-1]
        fwd = lstm_scan(self.params, f"{self.prefix}.fwd", _char_vectors(self.table, ids), mask=mask)[-1]
        bwd = lstm_scan(self.params, f"{self.prefix}.bwd", _char_vectors(self.table, rev), mask=mask)[-1]
        return concat([fwd, bwd], axis=1)

    def word_features(self, word: str) -> Tensor:
        return self([word]).reshape(self.out_dim)
