"""Bi-LSTM-CRF taggers (word only, char CNN, char LSTM)."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from ..artifact import ArtifactError, ModelArtifact, parse_hyper
from ..corpus import TAG_INDEX, TAGS, Sentence, tags_to_spans
from ..embeddings import CHAR_VOCAB, EmbeddingTable, new_char_table, new_random_table, table_from_arrays
from ..nn import bilstm_encode, init_bilstm, init_linear, linear
from ..tensor import Rng, Tensor, concat, dropout, no_grad, parameter, take_rows
from .crf import CrfParams, crf_nll, viterbi
from .encoders import CharCNN, CharLSTM

VARIANTS = ("word_only", "char_lstm", "char_cnn", "baseline_crf")
NEURAL_VARIANTS = VARIANTS[:3]


@dataclass
class NerHyper:
    variant: str = "char_cnn"
    word_dim: int = 50
    word_lstm_hidden: int = 256
    char_dim: int = 25
    char_lstm_hidden: int = 25
    char_cnn_filters: int = 300
    char_cnn_kernel: int = 5
    dropout: float = 0.5
    unk_replace: float = 0.5
    constrained: bool = True
    l2: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown NER variant {self.variant!r}; valid: {', '.join(VARIANTS)}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @classmethod
    def for_variant(cls, variant: str, **overrides) -> "NerHyper":
        base = {"variant": variant}
        if variant == "baseline_crf":
            base.update(constrained=False, l2=1e-4, dropout=0.0)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict) -> "NerHyper":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown NER hyperparameters: {sorted(unknown)}")
        return cls(**data)


def bucket_by_length(n_items: int, length_of, batch_size: int) -> list:
    """Index batches whose members share one length, in first-seen order."""
    groups: dict = {}
    for i in range(n_items):
        groups.setdefault(length_of(i), []).append(i)
    out = []
    for idx in groups.values():
        for s in range(0, len(idx), batch_size):
            out.append(idx[s:s + batch_size])
    return out


class BiLstmCrfTagger:
    """Embedding layer -> Bi-LSTM -> affine projection -> CRF."""

    kind = "ner"

    def __init__(self, hyper: NerHyper, word_table: EmbeddingTable, rng: Optional[Rng] = None,
                 char_table: Optional[EmbeddingTable] = None, init: bool = True):
        if hyper.variant not in NEURAL_VARIANTS:
            raise ValueError(f"{hyper.variant} is not a Bi-LSTM-CRF variant")
        rng = rng or Rng(0)
        self.hyper = hyper
        self.word_table = word_table
        self.singletons: frozenset = frozenset()
        self.params: dict = {"word_emb": word_table.matrix}
        in_dim = word_table.dim
        self.char_encoder = None
        if hyper.variant != "word_only":
            self.char_table = char_table or new_char_table(hyper.char_dim, rng.child("char_emb"))
            self.params["char_emb"] = self.char_table.matrix
            if hyper.variant == "char_cnn":
                self.char_encoder = CharCNN(self.params, self.char_table, hyper.char_cnn_filters,
                                            hyper.char_cnn_kernel, rng.child("char_cnn"), init=init)
            else:
                self.char_encoder = CharLSTM(self.params, self.char_table, hyper.char_lstm_hidden,
                                             rng.child("char_lstm"), init=init)
            in_dim += self.char_encoder.out_dim
        K = len(TAGS)
        self.crf = CrfParams.zeros(K, constrained=hyper.constrained)
        self.params.update({"crf.trans": self.crf.transitions, "crf.start": self.crf.start, "crf.stop": self.crf.stop})
        if init:
            init_bilstm(self.params, "word_lstm", in_dim, hyper.word_lstm_hidden, rng.child("word_lstm"))
            init_linear(self.params, "proj", 2 * hyper.word_lstm_hidden, K, rng.child("proj"))

    # -- construction ---------------------------------------------------------
    @classmethod
    def build(cls, hyper: NerHyper, train: Sequence, rng: Rng,
              embeddings: Optional[EmbeddingTable] = None) -> "BiLstmCrfTagger":
        """New tagger whose word vocabulary (if not pretrained) is the training tokens."""
        counts = Counter(tok.lower() for sent, _ in train for tok in sent.tokens)
        table = embeddings or new_random_table(sorted(counts), hyper.word_dim, rng.child("word_emb"))
        model = cls(hyper, table, rng)
        model.singletons = frozenset(w for w, c in counts.items() if c == 1)
        return model

    @staticmethod
    def item_length(item) -> int:
        return len(item[0])

    def parameters(self) -> list:
        return [p for p in self.params.values() if p.requires_grad]

    # -- forward ----------------------------------------------------------------
    def _word_ids(self, sentences: Sequence[Sentence], train: bool, rng: Optional[Rng]) -> np.ndarray:
        ids = np.array([self.word_table.rows(s.tokens) for s in sentences], dtype=np.int64)
        if train and self.hyper.unk_replace > 0 and self.singletons and rng is not None:
            single = np.array([[t.lower() in self.singletons for t in s.tokens] for s in sentences])
            drop = single & (rng.random(ids.shape) < self.hyper.unk_replace)
            ids = np.where(drop, self.word_table.unk_row, ids)
        return ids

    def token_inputs(self, sentences: Sequence[Sentence], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        """Per-token input vectors [B, L, D] for equal-length sentences."""
        B, L = len(sentences), len(sentences[0])
        x = take_rows(self.word_table.matrix, self._word_ids(sentences, train, rng))
        if self.char_encoder is not None:
            vocab: dict = {}
            where = np.array([[vocab.setdefault(t, len(vocab)) for t in s.tokens] for s in sentences])
            feats = self.char_encoder(list(vocab))
            x = concat([x, take_rows(feats, where)], axis=2)
        return x

    def emissions(self, sentences: Sequence[Sentence], train: bool = False, rng: Optional[Rng] = None) -> Tensor:
        lengths = {len(s) for s in sentences}
        if len(lengths) != 1 or 0 in lengths:
            raise ValueError("emissions() needs non-empty sentences of one length")
        B, L = len(sentences), len(sentences[0])
        x = self.token_inputs(sentences, train, rng)
        x = dropout(x, self.hyper.dropout, train, rng.child("dropout") if rng is not None and train else None)
        h = bilstm_encode(self.params, "word_lstm", x)
        H2 = h.shape[2]
        return linear(self.params, "proj", h.reshape(B * L, H2)).reshape(B, L, len(TAGS))

    def loss(self, batch: Sequence, rng: Optional[Rng] = None) -> Tensor:
        sentences = [s for s, _ in batch]
        gold = np.array([[TAG_INDEX[t] for t in tags] for _, tags in batch], dtype=np.int64)
        return crf_nll(self.emissions(sentences, train=True, rng=rng), gold, self.crf)

    # -- inference --------------------------------------------------------------
    def predict(self, sentences: Sequence[Sentence], batch_size: int = 64) -> list:
        """BIO tag strings per sentence (Viterbi, dropout off)."""
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

    # -- persistence ------------------------------------------------------------
    def to_artifact(self, meta: Optional[dict] = None) -> ModelArtifact:
        vocab = {"words": self.word_table.tokens(), "tags": list(TAGS)}
        if self.char_encoder is not None:
            vocab["chars"] = list(CHAR_VOCAB)
        return ModelArtifact(
            "ner", self.hyper.variant, asdict(self.hyper), vocab,
            {k: v.data.copy() for k, v in self.params.items()},
            dict(meta or {}, word_trainable=self.word_table.trainable),
        )

    @classmethod
    def from_artifact(cls, art: ModelArtifact) -> "BiLstmCrfTagger":
        if art.kind != "ner" or art.family not in NEURAL_VARIANTS:
            raise ArtifactError(f"not a Bi-LSTM-CRF artifact: {art.kind}/{art.family}")
        if art.vocab.get("tags") != list(TAGS):
            raise ArtifactError("artifact tag set does not match this version")
        if "chars" in art.vocab and art.vocab["chars"] != list(CHAR_VOCAB):
            raise ArtifactError("artifact character inventory does not match this version")
        hyper = parse_hyper(art, NerHyper.from_dict)
        words = table_from_arrays(art.vocab["words"], art.params["word_emb"], art.meta.get("word_trainable", True))
        chars = None
        if "char_emb" in art.params:
            chars = table_from_arrays(list(CHAR_VOCAB), art.params["char_emb"], True, lowercase=False)
        model = cls(hyper, words, Rng(0), char_table=chars, init=False)
        for name, arr in art.params.items():
            if name in model.params:
                model.params[name].data = arr.astype(np.float64)
            else:
                model.params[name] = parameter(arr)
        return model

    def state(self) -> dict:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state(self, state: dict) -> None:
        for k, v in state.items():
            self.params[k].data = v.copy()
