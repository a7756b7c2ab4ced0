"""One-call training runs for taggers and relation classifiers, used by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .embeddings import EmbeddingTable
from .evaluation import Scores
from .ner import NerHyper, build_tagger, evaluate_tagger
from .relation import ReHyper, RfHyper, build_relation_model, evaluate_relations, rf_train
from .tensor import Rng
from .training import TrainConfig, TrainResult, train

# the sparse feature CRF is a linear model; it converges far faster with a larger step
BASELINE_LR = 0.05


def default_train_config(variant: str, overrides: Optional[dict] = None) -> TrainConfig:
    cfg = TrainConfig(lr=BASELINE_LR) if variant == "baseline_crf" else TrainConfig()
    return replace(cfg, **(overrides or {}))


@dataclass
class RunOutcome:
    model: object
    test: Scores
    dev: Optional[Scores]
    result: Optional[TrainResult]
    seed: int


def run_ner(hyper: NerHyper, train_items: Sequence, dev_items: Sequence, test_items: Sequence, seed: int,
            cfg: Optional[TrainConfig] = None, embeddings: Optional[EmbeddingTable] = None,
            log_file=None) -> RunOutcome:
    cfg = cfg or default_train_config(hyper.variant)
    rng = Rng(seed)
    model = build_tagger(hyper, train_items, rng.child("init"), embeddings)
    result = train(model, train_items, lambda m: evaluate_tagger(m, dev_items).micro.f1, cfg,
                   rng.child("train"), log_file)
    return RunOutcome(model, evaluate_tagger(model, test_items), evaluate_tagger(model, dev_items), result, seed)


def run_re(family: str, train_items: Sequence, dev_items: Sequence, test_items: Sequence, seed: int,
           hyper: Optional[ReHyper] = None, rf_hyper: Optional[RfHyper] = None, cfg: Optional[TrainConfig] = None,
           embeddings: Optional[EmbeddingTable] = None, log_file=None) -> RunOutcome:
    rng = Rng(seed)
    if family == "random_forest":
        model = rf_train(train_items, rf_hyper or RfHyper(), rng.child("forest"))
        return RunOutcome(model, evaluate_relations(model, test_items), evaluate_relations(model, dev_items), None, seed)
    hyper = hyper or ReHyper(family=family)
    if hyper.family != family:
        hyper = replace(hyper, family=family)
    model = build_relation_model(hyper, train_items, rng.child("init"), embeddings)
    result = train(model, train_items, lambda m: evaluate_relations(m, dev_items).micro.f1, cfg or TrainConfig(),
                   rng.child("train"), log_file)
    return RunOutcome(model, evaluate_relations(model, test_items), evaluate_relations(model, dev_items), result, seed)
