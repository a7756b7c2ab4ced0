"""DS-Event relation classifiers (CNN, Att-BLSTM, random forest)."""

from __future__ import annotations

from typing import Optional, Sequence

from ..artifact import ArtifactError, ModelArtifact
from ..embeddings import EmbeddingTable
from ..evaluation import Scores, re_score
from ..tensor import Rng
from .features import STOP_WORDS, ngram_featurize, relative_positions
from .forest import RandomForestClassifier, RfHyper, rf_predict, rf_train
from .neural import (
    FAMILIES, AttBlstmClassifier, CnnRelationClassifier, ReHyper, attblstm_classify, cnn_classify,
)

RE_VARIANTS = ("cnn", "att_blstm", "random_forest")


def build_relation_model(hyper: ReHyper, train: Sequence, rng: Rng, embeddings: Optional[EmbeddingTable] = None):
    klass = CnnRelationClassifier if hyper.family == "cnn" else AttBlstmClassifier
    return klass.build(hyper, train, rng, embeddings)


def relation_model_from_artifact(art: ModelArtifact):
    if art.kind != "re":
        raise ArtifactError(f"expected a relation model, found {art.kind}")
    if art.family == "random_forest":
        return RandomForestClassifier.from_artifact(art)
    return CnnRelationClassifier.from_artifact(art)


def evaluate_relations(model, instances: Sequence) -> Scores:
    return re_score([i.label for i in instances], model.predict(list(instances)))


__all__ = [
    "RE_VARIANTS", "FAMILIES", "ReHyper", "RfHyper", "CnnRelationClassifier", "AttBlstmClassifier",
    "RandomForestClassifier", "build_relation_model", "relation_model_from_artifact", "evaluate_relations",
    "relative_positions", "ngram_featurize", "STOP_WORDS", "rf_train", "rf_predict", "cnn_classify",
    "attblstm_classify",
]
