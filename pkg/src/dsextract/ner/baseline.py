"""Feature-based linear-chain CRF baseline with a small rule-based POS tagger.

The POS tagger is an approximation: closed-class word lists plus suffix rules
over a dozen coarse classes. It exists only to feed the baseline's features.
"""

from __future__ import annotations

from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from ..artifact import ArtifactError, ModelArtifact, parse_hyper
from ..corpus import TAG_INDEX, TAGS, Sentence, tags_to_spans
from ..tensor import Rng, Tensor, no_grad, parameter, take_rows
from .crf import CrfParams, crf_nll, viterbi
from .tagger import NerHyper, bucket_by_length

POS_CLASSES = ("DET", "PRON", "ADP", "CONJ", "AUX", "PART", "NUM", "PUNCT", "ADV", "ADJ", "VERB", "NOUN")

_CLOSED = {
    "DET": "a an the this that these those each every some any no all both another such".split(),
    "PRON": ("i me my mine you your he him his she her hers it its we us our they them their "
             "who whom whose which what herself himself themselves myself").split(),
    "ADP": ("of in on at by for with from to into onto over under after before during since "
            "about against between through without within per via upon").split(),
    "CONJ": "and or but nor so yet because although though while if unless whereas".split(),
    "AUX": ("is are was were be been being am has have had do does did will would shall should "
            "can could may might must").split(),
    "PART": "not n't no never".split(),
    "ADV": ("very also still now then daily twice nightly again often never always recently "
            "currently previously just only too well").split(),
}
_WORD_POS = {w: tag for tag, words in _CLOSED.items() for w in words}
_SUFFIX_POS = (
    ("ly", "ADV"), ("ing", "VERB"), ("ed", "VERB"), ("ize", "VERB"), ("ise", "VERB"),
    ("ous", "ADJ"), ("ful", "ADJ"), ("ive", "ADJ"), ("able", "ADJ"), ("ible", "ADJ"),
    ("al", "ADJ"), ("ic", "ADJ"), ("less", "ADJ"),
)


def coarse_pos(token: str) -> str:
    low = token.lower()
    if low in _WORD_POS:
        return _WORD_POS[low]
    if not any(ch.isalnum() for ch in token):
        return "PUNCT"
    if any(ch.isdigit() for ch in token) and not any(ch.isalpha() for ch in token):
        return "NUM"
    for suf, tag in _SUFFIX_POS:
        if low.endswith(suf) and len(low) > len(suf) + 2:
            return tag
    return "NOUN"


def pos_tags(tokens: Sequence[str]) -> list:
    return [coarse_pos(t) for t in tokens]


def word_shape(token: str) -> str:
    """Collapsed character classes, e.g. ``Turmeric`` -> ``Xx``, ``B12`` -> ``Xd``."""
    out = []
    for ch in token:
        c = "X" if ch.isupper() else "x" if ch.islower() else "d" if ch.isdigit() else ch
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


def baseline_features(sentence: Sentence, i: int, pos: Optional[list] = None) -> list:
    """Feature strings for token ``i``; pure function of the sentence and position."""
    toks = sentence.tokens
    if not 0 <= i < len(toks):
        raise IndexError(f"position {i} outside sentence of length {len(toks)}")
    pos = pos if pos is not None else pos_tags(toks)
    w = toks[i]
    low = w.lower()
    prev = pos[i - 1] if i > 0 else "BOS"
    nxt = pos[i + 1] if i + 1 < len(toks) else "EOS"
    return [
        "bias",
        f"w={low}",
        f"suf2={low[-2:]}",
        f"suf3={low[-3:]}",
        f"pos[-1]={prev}",
        f"pos[0]={pos[i]}",
        f"pos[+1]={nxt}",
        f"cap={w[:1].isupper()}",
        f"digit={any(ch.isdigit() for ch in w)}",
        f"shape={word_shape(w)}",
    ]


N_FEATURES = 10


class FeatureCrfTagger:
    """Linear CRF whose emission scores are sums of per-feature weight rows.

    Feature index 0 is reserved for features never seen in training; its row
    receives no gradient and stays zero.
    """

    kind = "ner"

    def __init__(self, hyper: NerHyper, feature_index: dict):
        self.hyper = hyper
        self.feature_index = feature_index
        K = len(TAGS)
        self.crf = CrfParams.zeros(K, constrained=hyper.constrained)
        self.params = {
            "W": parameter(np.zeros((len(feature_index) + 1, K))),
            "crf.trans": self.crf.transitions, "crf.start": self.crf.start, "crf.stop": self.crf.stop,
        }

    @classmethod
    def build(cls, hyper: NerHyper, train: Sequence, rng: Optional[Rng] = None) -> "FeatureCrfTagger":
        if not train:
            raise ValueError("cannot train the baseline CRF on an empty corpus")
        index: dict = {}
        for sent, _ in train:
            pos = pos_tags(sent.tokens)
            for i in range(len(sent)):
                for f in baseline_features(sent, i, pos):
                    index.setdefault(f, len(index) + 1)
        return cls(hyper, index)

    @staticmethod
    def item_length(item) -> int:
        return len(item[0])

    def parameters(self) -> list:
        return list(self.params.values())

    def feature_ids(self, sentences: Sequence[Sentence]) -> np.ndarray:
        rows = []
        for s in sentences:
            pos = pos_tags(s.tokens)
            rows.append([[self.feature_index.get(f, 0) for f in baseline_features(s, i, pos)] for i in range(len(s))])
        return np.array(rows, dtype=np.int64)

    def emissions(self, sentences: Sequence[Sentence], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        if len({len(s) for s in sentences}) != 1:
            raise ValueError("emissions() needs sentences of one length")
        return take_rows(self.params["W"], self.feature_ids(sentences)).sum(axis=2)

    def loss(self, batch: Sequence, rng: Optional[Rng] = None) -> Tensor:
        sentences = [s for s, _ in batch]
        gold = np.array([[TAG_INDEX[t] for t in tags] for _, tags in batch], dtype=np.int64)
        nll = crf_nll(self.emissions(sentences), gold, self.crf)
        if self.hyper.l2 > 0:
            W = self.params["W"]
            nll = nll + (W * W).sum() * (0.5 * self.hyper.l2)
        return nll

    def predict(self, sentences: Sequence[Sentence], batch_size: int = 64) -> list:
        for s in sentences:
            if len(s) == 0:
                raise ValueError("cannot tag an empty token stream")
        out: list = [None] * len(sentences)
        with no_grad():
            for idx in bucket_by_length(len(sentences), lambda i: len(sentences[i]), batch_size):
                em = self.emissions([sentences[i] for i in idx]).data
                for row, i in enumerate(idx):
                    path, _ = viterbi(em[row], self.crf)
                    out[i] = [TAGS[k] for k in path]
        return out

    def tag(self, sentence: Sentence) -> list:
        return tags_to_spans(self.predict([sentence])[0], mode="lenient")

    def to_artifact(self, meta: Optional[dict] = None) -> ModelArtifact:
        features = sorted(self.feature_index, key=self.feature_index.get)
        return ModelArtifact("ner", "baseline_crf", asdict(self.hyper), {"features": features, "tags": list(TAGS)},
                             {k: v.data.copy() for k, v in self.params.items()}, dict(meta or {}))

    @classmethod
    def from_artifact(cls, art: ModelArtifact) -> "FeatureCrfTagger":
        if art.kind != "ner" or art.family != "baseline_crf":
            raise ArtifactError(f"not a baseline CRF artifact: {art.kind}/{art.family}")
        if art.vocab.get("tags") != list(TAGS):
            raise ArtifactError("artifact tag set does not match this version")
        model = cls(parse_hyper(art, NerHyper.from_dict), {f: i + 1 for i, f in enumerate(art.vocab["features"])})
        model.load_state(art.params)
        return model

    def state(self) -> dict:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state(self, state: dict) -> None:
        for k, v in state.items():
            if self.params[k].shape != v.shape:
                raise ArtifactError(f"parameter {k} has shape {v.shape}, expected {self.params[k].shape}")
            self.params[k].data = np.array(v, dtype=np.float64)
