"""Random forest of CART trees over binary n-gram features (relation baseline)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from ..artifact import ArtifactError, ModelArtifact, parse_hyper
from ..corpus import RELATION_LABELS, RelationInstance, RelationLabel
from ..tensor import Rng
from .features import STOP_WORDS, ngram_featurize

N_CLASSES = len(RELATION_LABELS)


@dataclass
class RfHyper:
    n_trees: int = 100
    max_features: str = "sqrt"
    max_depth: Optional[int] = None
    ngram_orders: list = field(default_factory=lambda: [1, 2])
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_features != "sqrt":
            raise ValueError("only the 'sqrt' max_features rule is supported")

    @classmethod
    def from_dict(cls, data: dict) -> "RfHyper":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown random-forest hyperparameters: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Tree:
    """Flat binary tree; ``feature[i] < 0`` marks a leaf. Rows with the feature go right."""

    feature: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # [nodes, classes] weighted class counts

    def predict_row(self, present: set) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.right[node] if int(self.feature[node]) in present else self.left[node]
        return int(np.argmax(self.counts[node]))


def _gini_split(with_counts: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Weighted child impurity for each candidate feature (lower is better)."""
    without = total[None, :] - with_counts
    n_with = with_counts.sum(axis=1)
    n_without = without.sum(axis=1)
    g_with = n_with - (with_counts ** 2).sum(axis=1) / np.maximum(n_with, 1e-12)
    g_without = n_without - (without ** 2).sum(axis=1) / np.maximum(n_without, 1e-12)
    return g_with + g_without


def grow_tree(X: sparse.csr_matrix, y: np.ndarray, weights: np.ndarray, hyper: RfHyper, rng: Rng) -> Tree:
    """CART with Gini impurity; at each node sqrt(n_features) candidates are drawn from
    the features that vary inside the node. Ties go to the lowest feature index."""
    n_features = X.shape[1]
    mtry = max(1, int(math.ceil(math.sqrt(max(n_features, 1)))))
    Y = np.zeros((len(y), N_CLASSES))
    Y[np.arange(len(y)), y] = weights
    feature, left, right, counts = [], [], [], []

    def new_node(c):
        feature.append(-1)
        left.append(-1)
        right.append(-1)
        counts.append(c)
        return len(feature) - 1

    root_rows = np.flatnonzero(weights > 0)
    stack = [(new_node(Y[root_rows].sum(axis=0)), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        total = counts[node]
        if (total > 0).sum() <= 1 or len(rows) < hyper.min_samples_split:
            continue
        if hyper.max_depth is not None and depth >= hyper.max_depth:
            continue
        Xs = X[rows]
        with_counts = np.asarray((Xs.T @ sparse.csr_matrix(Y[rows])).todense())
        n_with = with_counts.sum(axis=1)
        varying = np.flatnonzero((n_with > 0) & (n_with < total.sum()))
        if len(varying) == 0:
            continue
        if len(varying) > mtry:
            varying = np.sort(varying[rng.choice(len(varying), size=mtry, replace=False)])
        scores = _gini_split(with_counts[varying], total)
        f = int(varying[int(np.argmin(scores))])
        has = np.asarray(Xs[:, f].todense()).ravel() > 0
        l_rows, r_rows = rows[~has], rows[has]
        feature[node] = f
        left[node] = new_node(total - with_counts[f])
        right[node] = new_node(with_counts[f])
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(counts, dtype=np.float64))


class RandomForestClassifier:
    """Bagged CART trees with a majority vote; vote ties go to the lowest class index."""

    kind = "re"
    family = "random_forest"

    def __init__(self, hyper: RfHyper, feature_index: dict, trees: Optional[list] = None,
                 stop_words: Sequence[str] = tuple(sorted(STOP_WORDS))):
        self.hyper = hyper
        self.feature_index = feature_index
        self.trees = trees or []
        self.stop_words = frozenset(stop_words)

    def featurize(self, instance: RelationInstance) -> set:
        feats = ngram_featurize(instance, self.hyper.ngram_orders, self.stop_words)
        return {self.feature_index[f] for f in feats if f in self.feature_index}

    def matrix(self, instances: Sequence[RelationInstance]) -> sparse.csr_matrix:
        rows, cols = [], []
        for r, inst in enumerate(instances):
            for c in sorted(self.featurize(inst)):
                rows.append(r)
                cols.append(c)
        data = np.ones(len(rows))
        return sparse.csr_matrix((data, (rows, cols)), shape=(len(instances), len(self.feature_index)))

    def votes(self, instance: RelationInstance) -> np.ndarray:
        present = self.featurize(instance)
        v = np.zeros(N_CLASSES, dtype=np.int64)
        for tree in self.trees:
            v[tree.predict_row(present)] += 1
        return v

    def predict(self, instances: Sequence[RelationInstance]) -> list:
        return [RELATION_LABELS[int(np.argmax(self.votes(i)))] for i in instances]

    def predict_proba(self, instances: Sequence[RelationInstance]) -> np.ndarray:
        return np.array([self.votes(i) / max(len(self.trees), 1) for i in instances])

    # -- persistence -------------------------------------------------------------
    def to_artifact(self, meta: Optional[dict] = None) -> ModelArtifact:
        sizes = np.array([len(t.feature) for t in self.trees], dtype=np.int64)
        params = {
            "tree_sizes": sizes,
            "feature": np.concatenate([t.feature for t in self.trees]),
            "left": np.concatenate([t.left for t in self.trees]),
            "right": np.concatenate([t.right for t in self.trees]),
            "counts": np.concatenate([t.counts for t in self.trees]),
        }
        vocab = {
            "features": sorted(self.feature_index, key=self.feature_index.get),
            "stop_words": sorted(self.stop_words),
            "labels": [lab.value for lab in RELATION_LABELS],
        }
        return ModelArtifact("re", self.family, asdict(self.hyper), vocab, params, dict(meta or {}))

    @classmethod
    def from_artifact(cls, art: ModelArtifact) -> "RandomForestClassifier":
        if art.kind != "re" or art.family != cls.family:
            raise ArtifactError(f"not a random-forest artifact: {art.kind}/{art.family}")
        if art.vocab.get("labels") != [lab.value for lab in RELATION_LABELS]:
            raise ArtifactError("artifact label set does not match this version")
        p = art.params
        trees, start = [], 0
        for size in p["tree_sizes"]:
            sl = slice(start, start + int(size))
            trees.append(Tree(p["feature"][sl], p["left"][sl], p["right"][sl], p["counts"][sl]))
            start += int(size)
        index = {f: i for i, f in enumerate(art.vocab["features"])}
        return cls(parse_hyper(art, RfHyper.from_dict), index, trees, art.vocab["stop_words"])


def rf_train(instances: Sequence[RelationInstance], hyper: RfHyper = RfHyper(),
             rng: Optional[Rng] = None) -> RandomForestClassifier:
    if not instances:
        raise ValueError("empty training set")
    rng = rng or Rng(0)
    index: dict = {}
    for inst in instances:
        for f in sorted(ngram_featurize(inst, hyper.ngram_orders)):
            index.setdefault(f, len(index))
    model = RandomForestClassifier(hyper, index)
    X = model.matrix(instances)
    y = np.array([RelationLabel(inst.label).index for inst in instances], dtype=np.int64)
    n = len(instances)
    for k in range(hyper.n_trees):
        trng = rng.child(f"tree{k}")
        weights = np.bincount(trng.integers(0, n, size=n), minlength=n).astype(np.float64)
        model.trees.append(grow_tree(X, y, weights, hyper, trng))
    return model


def rf_predict(model: RandomForestClassifier, instance: RelationInstance) -> RelationLabel:
    return model.predict([instance])[0]
