"""Brute-force reference implementations used by the tests."""

import itertools

import numpy as np


def all_paths(L: int, K: int) -> np.ndarray:
    return np.array(list(itertools.product(range(K), repeat=L)), dtype=np.int64).reshape(-1, L)


def path_scores(emissions, trans, start, stop) -> tuple:
    L, K = emissions.shape
    paths = all_paths(L, K)
    s = start[paths[:, 0]] + stop[paths[:, -1]] + emissions[np.arange(L), paths].sum(axis=1)
    if L > 1:
        s = s + trans[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    return paths, s


def brute_force_crf(emissions, trans, start, stop):
    """(log Z, best path, best score) by enumerating all K^L paths.

    Among equally scored best paths the one with the lowest last tag wins, then
    the lowest tag before it, and so on (the backpointer tie rule).
    """
    paths, s = path_scores(emissions, trans, start, stop)
    m = s.max()
    logz = m + np.log(np.exp(s - m).sum())
    best = paths[s == m]
    chosen = min(best.tolist(), key=lambda p: p[::-1])
    return logz, chosen, m
