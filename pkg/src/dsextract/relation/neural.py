"""Neural relation classifiers: position-embedding CNN and attention Bi-LSTM."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from ..artifact import ArtifactError, ModelArtifact, parse_hyper
from ..corpus import RELATION_LABELS, RelationInstance, RelationLabel
from ..embeddings import EmbeddingTable, new_random_table, table_from_arrays
from ..nn import bilstm_encode, init_bilstm, init_linear, linear, window_indices
from ..tensor import (
    Rng, Tensor, concat, dropout, gather, glorot, log_softmax, no_grad, parameter, softmax, take_rows,
)
from .features import relative_positions

FAMILIES = ("cnn", "att_blstm")
N_ROLES = 3  # other, DS, Event


@dataclass
class ReHyper:
    family: str = "cnn"
    word_dim: int = 50
    pos_dim: int = 100
    cnn_filter_sizes: list = field(default_factory=lambda: [2, 3, 4])
    cnn_filters_per_size: int = 128
    cnn_dropout: float = 0.3
    lstm_hidden: int = 128
    att_dropout: float = 0.3
    l2: float = 1e-4
    clip: int = 30
    unk_replace: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown relation model {self.family!r}; valid: {', '.join(FAMILIES)}")
        for rate in (self.cnn_dropout, self.att_dropout):
            if not 0.0 <= rate < 1.0:
                raise ValueError("dropout must be in [0, 1)")
        if self.clip < 1 or not self.cnn_filter_sizes:
            raise ValueError("clip must be positive and at least one filter size is needed")

    @classmethod
    def from_dict(cls, data: dict) -> "ReHyper":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown relation hyperparameters: {sorted(unknown)}")
        return cls(**data)


def _labels(instances: Sequence[RelationInstance]) -> np.ndarray:
    return np.array([RelationLabel(i.label).index for i in instances], dtype=np.int64)


class _NeuralRelationModel:
    kind = "re"

    def __init__(self, hyper: ReHyper, word_table: EmbeddingTable, rng: Optional[Rng] = None, init: bool = True):
        self.hyper = hyper
        self.word_table = word_table
        self.singletons: frozenset = frozenset()
        self.params: dict = {"word_emb": word_table.matrix}
        if init:
            self.init_params(rng or Rng(0))

    @classmethod
    def build(cls, hyper: ReHyper, train: Sequence[RelationInstance], rng: Rng,
              embeddings: Optional[EmbeddingTable] = None):
        # count each sentence once even if it carries several pairs
        sentences = {inst.sentence.id: inst.sentence for inst in train}
        counts = Counter(tok.lower() for s in sentences.values() for tok in s.tokens)
        table = embeddings or new_random_table(sorted(counts), hyper.word_dim, rng.child("word_emb"))
        model = cls(hyper, table, rng)
        model.singletons = frozenset(w for w, c in counts.items() if c == 1)
        return model

    def init_params(self, rng: Rng) -> None:
        raise NotImplementedError

    def logits(self, instances: Sequence[RelationInstance], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        raise NotImplementedError

    @staticmethod
    def item_length(item: RelationInstance) -> int:
        return len(item.sentence)

    def parameters(self) -> list:
        return [p for p in self.params.values() if p.requires_grad]

    def word_ids(self, instances: Sequence[RelationInstance], train: bool, rng: Optional[Rng]) -> np.ndarray:
        ids = np.array([self.word_table.rows(i.sentence.tokens) for i in instances], dtype=np.int64)
        if train and rng is not None and self.hyper.unk_replace > 0 and self.singletons:
            single = np.array([[t.lower() in self.singletons for t in i.sentence.tokens] for i in instances])
            drop = single & (rng.random(ids.shape) < self.hyper.unk_replace)
            ids = np.where(drop, self.word_table.unk_row, ids)
        return ids

    def output_l2(self) -> Optional[Tensor]:
        if self.hyper.l2 <= 0:
            return None
        W = self.params["out.W"]
        return (W * W).sum() * (0.5 * self.hyper.l2)

    def loss(self, batch: Sequence[RelationInstance], rng: Optional[Rng] = None) -> Tensor:
        """Mean cross-entropy plus L2 on the output layer weights."""
        z = self.logits(batch, train=True, rng=rng)
        B = len(batch)
        logp = log_softmax(z, axis=1)
        picked = gather(logp, np.arange(B) * len(RELATION_LABELS) + _labels(batch))
        loss = picked.sum() * (-1.0 / B)
        reg = self.output_l2()
        return loss if reg is None else loss + reg

    def predict_proba(self, instances: Sequence[RelationInstance], batch_size: int = 64) -> np.ndarray:
        out = np.zeros((len(instances), len(RELATION_LABELS)))
        with no_grad():
            for idx in _length_groups(instances, batch_size):
                out[idx] = softmax(self.logits([instances[i] for i in idx]), axis=1).data
        return out

    def predict(self, instances: Sequence[RelationInstance]) -> list:
        if not instances:
            return []
        return [RELATION_LABELS[int(k)] for k in np.argmax(self.predict_proba(instances), axis=1)]

    # -- persistence --------------------------------------------------------------
    def to_artifact(self, meta: Optional[dict] = None) -> ModelArtifact:
        vocab = {"words": self.word_table.tokens(), "labels": [lab.value for lab in RELATION_LABELS]}
        return ModelArtifact("re", self.hyper.family, asdict(self.hyper), vocab,
                             {k: v.data.copy() for k, v in self.params.items()},
                             dict(meta or {}, word_trainable=self.word_table.trainable))

    @classmethod
    def from_artifact(cls, art: ModelArtifact):
        if art.kind != "re" or art.family not in FAMILIES:
            raise ArtifactError(f"not a neural relation artifact: {art.kind}/{art.family}")
        if art.vocab.get("labels") != [lab.value for lab in RELATION_LABELS]:
            raise ArtifactError("artifact label set does not match this version")
        hyper = parse_hyper(art, ReHyper.from_dict)
        klass = CnnRelationClassifier if hyper.family == "cnn" else AttBlstmClassifier
        table = table_from_arrays(art.vocab["words"], art.params["word_emb"], art.meta.get("word_trainable", True))
        model = klass(hyper, table, init=False)
        for name, arr in art.params.items():
            if name == "word_emb":
                continue
            model.params[name] = parameter(arr)
        return model

    def state(self) -> dict:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state(self, state: dict) -> None:
        for k, v in state.items():
            self.params[k].data = v.copy()


def _length_groups(instances: Sequence[RelationInstance], batch_size: int) -> list:
    groups: dict = {}
    for i, inst in enumerate(instances):
        groups.setdefault(len(inst.sentence), []).append(i)
    out = []
    for idx in groups.values():
        out.extend(idx[s:s + batch_size] for s in range(0, len(idx), batch_size))
    return out


class CnnRelationClassifier(_NeuralRelationModel):
    """Word embedding + two position embeddings -> multi-width convolution -> max-pool -> softmax."""

    def init_params(self, rng: Rng) -> None:
        h = self.hyper
        rows = 2 * h.clip + 1
        self.params["pos_ds"] = parameter(rng.child("pos_ds").uniform(-0.1, 0.1, (rows, h.pos_dim)))
        self.params["pos_ev"] = parameter(rng.child("pos_ev").uniform(-0.1, 0.1, (rows, h.pos_dim)))
        D = self.input_dim
        for k in h.cnn_filter_sizes:
            self.params[f"conv{k}.W"] = parameter(glorot(rng.child(f"conv{k}"), k * D, h.cnn_filters_per_size))
            self.params[f"conv{k}.b"] = parameter(np.zeros(h.cnn_filters_per_size))
        init_linear(self.params, "out", self.pooled_dim, len(RELATION_LABELS), rng.child("out"))

    @property
    def input_dim(self) -> int:
        return self.word_table.dim + 2 * self.hyper.pos_dim

    @property
    def pooled_dim(self) -> int:
        return len(self.hyper.cnn_filter_sizes) * self.hyper.cnn_filters_per_size

    def token_inputs(self, instances: Sequence[RelationInstance], train: bool = False,
                     rng: Optional[Rng] = None) -> Tensor:
        """Per-token [word ; pos-to-DS ; pos-to-Event] vectors, [B, L, word_dim + 2 pos_dim]."""
        clip = self.hyper.clip
        pos = [relative_positions(i, clip) for i in instances]
        d_ds = np.stack([p[0] for p in pos]) + clip
        d_ev = np.stack([p[1] for p in pos]) + clip
        words = take_rows(self.word_table.matrix, self.word_ids(instances, train, rng))
        return concat([words, take_rows(self.params["pos_ds"], d_ds), take_rows(self.params["pos_ev"], d_ev)], axis=2)

    def pooled(self, instances: Sequence[RelationInstance], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        x = self.token_inputs(instances, train, rng)
        B, L, D = x.shape
        width = max(self.hyper.cnn_filter_sizes)
        if L < width:
            x = concat([x, Tensor(np.zeros((B, width - L, D)))], axis=1)
            L = width
        flat = x.reshape(B * L, D)
        feats = []
        for k in self.hyper.cnn_filter_sizes:
            n_win = L - k + 1
            win = take_rows(flat, window_indices(B, L, k)).reshape(B * n_win, k * D)
            W, b = self.params[f"conv{k}.W"], self.params[f"conv{k}.b"]
            conv = (win @ W + b.expand(B * n_win, W.shape[1])).tanh()
            feats.append(conv.reshape(B, n_win, W.shape[1]).max(axis=1))
        return concat(feats, axis=1)

    def logits(self, instances: Sequence[RelationInstance], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        h = self.pooled(instances, train, rng)
        h = dropout(h, self.hyper.cnn_dropout, train, rng.child("dropout") if train and rng is not None else None)
        return linear(self.params, "out", h)


class AttBlstmClassifier(_NeuralRelationModel):
    """Bi-LSTM (directions summed) with softmax attention pooling over positions."""

    def init_params(self, rng: Rng) -> None:
        H = self.hyper.lstm_hidden
        init_bilstm(self.params, "lstm", self.word_table.dim + N_ROLES, H, rng.child("lstm"))
        self.params["att.w"] = parameter(glorot(rng.child("att"), H, 1))
        init_linear(self.params, "out", H, len(RELATION_LABELS), rng.child("out"))

    def token_inputs(self, instances: Sequence[RelationInstance], train: bool = False,
                     rng: Optional[Rng] = None) -> Tensor:
        """Word vector plus a one-hot role (other / DS / Event) per token."""
        B, L = len(instances), len(instances[0].sentence)
        roles = np.zeros((B, L, N_ROLES))
        roles[:, :, 0] = 1.0
        for r, inst in enumerate(instances):
            roles[r, inst.ds.start:inst.ds.end] = (0.0, 1.0, 0.0)
            roles[r, inst.event.start:inst.event.end] = (0.0, 0.0, 1.0)
        words = take_rows(self.word_table.matrix, self.word_ids(instances, train, rng))
        return concat([words, Tensor(roles)], axis=2)

    def attend(self, instances: Sequence[RelationInstance], train: bool = False, rng: Optional[Rng] = None) -> tuple:
        """Returns (sentence vector h* [B, H], attention weights [B, L])."""
        x = self.token_inputs(instances, train, rng)
        B, L, _ = x.shape
        Hs = bilstm_encode(self.params, "lstm", x, combine="sum")
        H = Hs.shape[2]
        scores = (Hs.tanh().reshape(B * L, H) @ self.params["att.w"]).reshape(B, L)
        alpha = softmax(scores, axis=1)
        r = (Hs * alpha.reshape(B, L, 1).expand(B, L, H)).sum(axis=1)
        return r.tanh(), alpha

    def logits(self, instances: Sequence[RelationInstance], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        h, _ = self.attend(instances, train, rng)
        h = dropout(h, self.hyper.att_dropout, train, rng.child("dropout") if train and rng is not None else None)
        return linear(self.params, "out", h)

    def attention(self, instance: RelationInstance) -> np.ndarray:
        with no_grad():
            return self.attend([instance])[1].data[0]


def cnn_classify(instance: RelationInstance, model: CnnRelationClassifier) -> np.ndarray:
    """Class distribution over (positive, negative, not_related)."""
    return model.predict_proba([instance])[0]


def attblstm_classify(instance: RelationInstance, model: AttBlstmClassifier) -> tuple:
    """(class distribution, attention weights with one entry per token)."""
    with no_grad():
        h, alpha = model.attend([instance])
        probs = softmax(linear(model.params, "out", h), axis=1).data[0]
    return probs, alpha.data[0]
