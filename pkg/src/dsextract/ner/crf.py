"""Linear-chain CRF: log-partition, gold path score, NLL and Viterbi decoding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..corpus import TAGS
from ..tensor import Tensor, as_tensor, gather, log_sum_exp, parameter, take_rows, tsum


def bio_masks(tags: Sequence[str] = TAGS) -> tuple:
    """Additive masks (0 or -inf) forbidding I-X unless preceded by B-X/I-X, and I-X at start."""
    K = len(tags)
    trans = np.zeros((K, K))
    start = np.zeros(K)
    for j, to in enumerate(tags):
        if not to.startswith("I-"):
            continue
        start[j] = -np.inf
        for i, frm in enumerate(tags):
            if frm[2:] != to[2:] or frm == "O":
                trans[i, j] = -np.inf
    return trans, start


@dataclass
class CrfParams:
    transitions: Tensor
    start: Tensor
    stop: Tensor
    constrained: bool = False
    tags: tuple = TAGS

    @classmethod
    def zeros(cls, K: int = len(TAGS), constrained: bool = False, tags: Sequence[str] = TAGS) -> "CrfParams":
        if constrained and len(tags) != K:
            raise ValueError("constraint mode needs one tag name per state")
        return cls(parameter(np.zeros((K, K))), parameter(np.zeros(K)), parameter(np.zeros(K)), constrained, tuple(tags))

    @property
    def K(self) -> int:
        return self.start.shape[0]

    def effective(self) -> tuple:
        """Transition/start/stop scores with the -inf mask applied when constrained."""
        if not self.constrained:
            return self.transitions, self.start, self.stop
        tmask, smask = bio_masks(self.tags)
        return self.transitions + Tensor(tmask), self.start + Tensor(smask), self.stop

    def effective_numpy(self) -> tuple:
        trans, start, stop = self.transitions.data, self.start.data, self.stop.data
        if self.constrained:
            tmask, smask = bio_masks(self.tags)
            trans, start = trans + tmask, start + smask
        return trans, start, stop


def _as_batch(emissions) -> Tensor:
    e = as_tensor(emissions)
    if e.ndim == 2:
        e = e.reshape(1, *e.shape)
    if e.ndim != 3 or e.shape[1] == 0:
        raise ValueError(f"emissions must be [L, K] or [B, L, K] with L >= 1, got {e.shape}")
    return e


def log_partition_batch(emissions, params: CrfParams) -> Tensor:
    """Forward algorithm in log space; emissions [B, L, K] -> log Z per row [B]."""
    e = _as_batch(emissions)
    B, L, K = e.shape
    trans, start, stop = params.effective()
    alpha = start.expand(B, K) + e[:, 0, :]
    trans_b = trans.reshape(1, K, K).expand(B, K, K)
    for t in range(1, L):
        scores = alpha.reshape(B, K, 1).expand(B, K, K) + trans_b + e[:, t, :].reshape(B, 1, K).expand(B, K, K)
        alpha = log_sum_exp(scores, axis=1)
    return log_sum_exp(alpha + stop.expand(B, K), axis=1)


def gold_score_batch(emissions, tags, params: CrfParams) -> Tensor:
    """Score of the given tag paths; ``tags`` is an int array [B, L]."""
    e = _as_batch(emissions)
    B, L, K = e.shape
    y = np.asarray(tags, dtype=np.int64).reshape(B, L)
    trans, start, stop = params.effective()
    if params.constrained:
        tmask, smask = bio_masks(params.tags)
        bad = np.isinf(smask[y[:, 0]]).any() or (L > 1 and np.isinf(tmask[y[:, :-1], y[:, 1:]]).any())
        if bad:
            raise ValueError("gold path uses a forbidden BIO transition")
    flat = (np.arange(B * L) * K + y.reshape(-1)).reshape(B, L)
    emit = tsum(gather(e, flat), axis=1)
    score = emit + take_rows(start.reshape(K, 1), y[:, 0]).reshape(B) + take_rows(stop.reshape(K, 1), y[:, -1]).reshape(B)
    if L > 1:
        score = score + tsum(gather(trans, y[:, :-1] * K + y[:, 1:]), axis=1)
    return score


def crf_log_partition(emissions, params: CrfParams) -> Tensor:
    """log sum over all K^L paths of exp(path score) for one sentence [L, K]."""
    return log_partition_batch(emissions, params).reshape(())


def crf_nll(emissions, gold, params: CrfParams) -> Tensor:
    """Mean over rows of log Z - gold path score. Accepts [L, K] or [B, L, K]."""
    e = _as_batch(emissions)
    y = np.asarray(gold, dtype=np.int64).reshape(e.shape[0], e.shape[1])
    nll = log_partition_batch(e, params) - gold_score_batch(e, y, params)
    return nll.sum() * (1.0 / e.shape[0])


def viterbi(emissions, params: CrfParams) -> tuple:
    """Best path and its score; ties go to the lowest tag index at every backpointer."""
    e = emissions.data if isinstance(emissions, Tensor) else np.asarray(emissions, dtype=np.float64)
    if e.ndim != 2 or e.shape[0] == 0:
        raise ValueError(f"emissions must be [L, K] with L >= 1, got {e.shape}")
    trans, start, stop = params.effective_numpy()
    L, K = e.shape
    score = start + e[0]
    back = np.zeros((L, K), dtype=np.int64)
    for t in range(1, L):
        cand = score[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], np.arange(K)] + e[t]
    final = score + stop
    best = int(np.argmax(final))
    path = [best]
    for t in range(L - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path, float(final[best])


def path_score(emissions: np.ndarray, path: Sequence[int], params: CrfParams) -> float:
    trans, start, stop = params.effective_numpy()
    s = start[path[0]] + stop[path[-1]] + sum(emissions[t, k] for t, k in enumerate(path))
    s += sum(trans[a, b] for a, b in zip(path[:-1], path[1:]))
    return float(s)
