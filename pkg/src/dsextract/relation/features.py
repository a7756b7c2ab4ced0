"""Relative entity positions and n-gram features for relation instances."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from ..corpus import RelationInstance

# common English function words; entity placeholders survive stop-word removal
STOP_WORDS: frozenset = frozenset("""
a an the this that these those is are was were be been being am has have had do does did
i me my you your he him his she her it its we our they them their
of in on at by to from with as into about than then so and or but if while
will would can could should may might must
""".split())

DS_MARK = "<ds>"
EVENT_MARK = "<event>"


def relative_positions(instance: RelationInstance, clip: int = 30) -> tuple:
    """Distances of every token to the DS head and to the Event head, clipped to [-clip, clip].

    The head of a span is its last token.
    """
    t = np.arange(len(instance.sentence))
    d_ds = np.clip(t - instance.ds.head, -clip, clip)
    d_ev = np.clip(t - instance.event.head, -clip, clip)
    return d_ds.astype(np.int64), d_ev.astype(np.int64)


def normalize_token(token: str) -> str:
    return token.lower()


def feature_units(instance: RelationInstance, stop_words: Iterable[str] = STOP_WORDS) -> list:
    """Lowercased tokens without stop words or bare punctuation; a placeholder opens each entity."""
    stop = stop_words if isinstance(stop_words, (set, frozenset)) else frozenset(stop_words)
    units = []
    for i, tok in enumerate(instance.sentence.tokens):
        if i == instance.ds.start:
            units.append(DS_MARK)
        if i == instance.event.start:
            units.append(EVENT_MARK)
        low = normalize_token(tok)
        if low in stop or not any(ch.isalnum() for ch in low):
            continue
        units.append(low)
    return units


def ngram_featurize(instance: RelationInstance, orders: Iterable[int] = (1, 2),
                    stop_words: Iterable[str] = STOP_WORDS) -> frozenset:
    """Binary presence features: n-grams over the filtered unit sequence."""
    units = feature_units(instance, stop_words)
    feats = set()
    for n in sorted(set(orders)):
        for i in range(len(units) - n + 1):
            feats.add(" ".join(units[i:i + n]))
    return frozenset(feats)
