"""Named-entity taggers for DS and Event mentions."""

from __future__ import annotations

from typing import Optional, Sequence

from ..artifact import ModelArtifact
from ..corpus import tags_to_spans
from ..embeddings import EmbeddingTable
from ..evaluation import Scores, ner_score
from ..tensor import Rng
from .baseline import FeatureCrfTagger
from .tagger import NEURAL_VARIANTS, VARIANTS, BiLstmCrfTagger, NerHyper


def build_tagger(hyper: NerHyper, train: Sequence, rng: Rng, embeddings: Optional[EmbeddingTable] = None):
    if hyper.variant == "baseline_crf":
        return FeatureCrfTagger.build(hyper, train, rng)
    return BiLstmCrfTagger.build(hyper, train, rng, embeddings)


def tagger_from_artifact(art: ModelArtifact):
    if art.family == "baseline_crf":
        return FeatureCrfTagger.from_artifact(art)
    return BiLstmCrfTagger.from_artifact(art)


def predict_spans(model, sentences: Sequence) -> dict:
    """Sentence id -> predicted spans (lenient decoding)."""
    tags = model.predict(list(sentences))
    return {s.id: tags_to_spans(t, mode="lenient") for s, t in zip(sentences, tags)}


def evaluate_tagger(model, items: Sequence) -> Scores:
    """Exact-match entity scores of ``model`` on (Sentence, tags) pairs."""
    gold = {s.id: tags_to_spans(t, mode="lenient") for s, t in items}
    return ner_score(gold, predict_spans(model, [s for s, _ in items]))


__all__ = [
    "VARIANTS", "NEURAL_VARIANTS", "NerHyper", "BiLstmCrfTagger", "FeatureCrfTagger",
    "build_tagger", "tagger_from_artifact", "predict_spans", "evaluate_tagger",
]
