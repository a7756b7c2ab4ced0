"""Exact-match entity scoring, multiclass relation scoring and report tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import ENTITY_LABELS, RELATION_LABELS, RelationLabel

MICRO = "Overall (micro)"


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    undefined: bool = False

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PrfScore":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f, tp + fn, tp, fp, fn, undefined=(tp + fp + fn == 0))


@dataclass
class Scores:
    """Per-label scores plus the pooled micro average, in display order."""

    per_label: dict
    micro: PrfScore

    def columns(self) -> list:
        return list(self.per_label) + [MICRO]

    def get(self, column: str) -> PrfScore:
        return self.micro if column == MICRO else self.per_label[column]

    def as_dict(self) -> dict:
        return {c: _score_dict(self.get(c)) for c in self.columns()}


def _score_dict(s: PrfScore) -> dict:
    return {"P": s.precision, "R": s.recall, "F1": s.f1, "Num": s.support}


def ner_score(gold: Mapping, pred: Mapping, labels: Sequence[str] = ENTITY_LABELS) -> Scores:
    """Entity-level scores; a prediction is a hit only if label, start and end all match.

    ``gold`` and ``pred`` map sentence id -> iterable of EntitySpan.
    """
    if set(gold) != set(pred):
        missing = sorted(set(gold) ^ set(pred))[:5]
        raise ValueError(f"gold and predicted sentence ids differ, e.g. {missing}")
    counts = {lab: [0, 0, 0] for lab in labels}
    for sid in gold:
        g = {(s.label, s.start, s.end) for s in gold[sid]}
        p = {(s.label, s.start, s.end) for s in pred[sid]}
        for lab, start, end in p:
            if lab in counts:
                counts[lab][0 if (lab, start, end) in g else 1] += 1
        for lab, start, end in g - p:
            if lab in counts:
                counts[lab][2] += 1
    per = {lab: PrfScore.from_counts(*counts[lab]) for lab in labels}
    tot = np.sum([counts[lab] for lab in labels], axis=0)
    return Scores(per, PrfScore.from_counts(int(tot[0]), int(tot[1]), int(tot[2])))


def re_score(gold: Sequence, pred: Sequence) -> Scores:
    """One-vs-rest P/R/F1 per relation class plus micro (equal to accuracy)."""
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    gold = [RelationLabel.parse(g) if isinstance(g, str) and not isinstance(g, RelationLabel) else g for g in gold]
    pred = [RelationLabel.parse(p) if isinstance(p, str) and not isinstance(p, RelationLabel) else p for p in pred]
    for lab in list(gold) + list(pred):
        if lab not in RELATION_LABELS:
            raise ValueError(f"unknown relation label {lab!r}")
    per = {}
    for lab in RELATION_LABELS:
        tp = sum(1 for g, p in zip(gold, pred) if g == lab and p == lab)
        fp = sum(1 for g, p in zip(gold, pred) if g != lab and p == lab)
        fn = sum(1 for g, p in zip(gold, pred) if g == lab and p != lab)
        per[DISPLAY[lab]] = PrfScore.from_counts(tp, fp, fn)
    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    wrong = len(gold) - correct
    return Scores(per, PrfScore.from_counts(correct, wrong, wrong))


DISPLAY = {
    RelationLabel.POSITIVE: "Positive",
    RelationLabel.NEGATIVE: "Negative",
    RelationLabel.NOT_RELATED: "Not related",
}


# -- multi-run summaries -------------------------------------------------------

@dataclass
class RunSummary:
    """Cell-wise mean and sample std over several :class:`Scores` with equal columns."""

    runs: list
    columns: list = field(default_factory=list)

    def __post_init__(self):
        if not self.runs:
            raise ValueError("no runs to summarise")
        self.columns = self.runs[0].columns()

    def values(self, column: str, metric: str) -> np.ndarray:
        return np.array([_score_dict(r.get(column))[metric] for r in self.runs], dtype=np.float64)

    def mean(self, column: str, metric: str) -> float:
        return float(self.values(column, metric).mean())

    def std(self, column: str, metric: str) -> float:
        v = self.values(column, metric)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.3f} ± {std:.3f}"


METRICS = ("P", "R", "F1", "Num")


def report_table(rows: Mapping, fmt: str = "tsv") -> str:
    """Render model rows (``name -> Scores | RunSummary``) as a Table-1/2 style grid.

    Column groups are one per label plus the micro overall, each with P, R, F1, Num.
    """
    if fmt not in ("tsv", "markdown"):
        raise ValueError(f"unknown report format {fmt!r}")
    if not rows:
        return ""
    first = next(iter(rows.values()))
    columns = first.columns if isinstance(first, RunSummary) else first.columns()
    header1 = [""] + [c for c in columns for _ in METRICS]
    header2 = [""] + [m for _ in columns for m in METRICS]
    body = []
    for name, res in rows.items():
        cells = [name]
        for col in columns:
            for m in METRICS:
                cells.append(_cell(res, col, m))
        body.append(cells)
    if fmt == "tsv":
        return "\n".join("\t".join(r) for r in [header1, header2] + body) + "\n"
    lines = ["| " + " | ".join(header1) + " |", "|" + "---|" * len(header1), "| " + " | ".join(header2) + " |"]
    lines += ["| " + " | ".join(r) + " |" for r in body]
    return "\n".join(lines) + "\n"


def _cell(res, column: str, metric: str) -> str:
    if isinstance(res, RunSummary):
        if metric == "Num":
            return str(int(round(res.mean(column, metric))))
        return format_mean_std(res.mean(column, metric), res.std(column, metric))
    value = _score_dict(res.get(column))[metric]
    return str(int(value)) if metric == "Num" else f"{value:.3f}"


def parse_report_table(text: str) -> dict:
    """Inverse of the TSV rendering: ``{model: {column: {metric: value}}}``.

    Plain cells become floats/ints; mean±std cells become ``(mean, std)`` tuples.
    """
    lines = [ln.split("\t") for ln in text.rstrip("\n").split("\n")]
    if len(lines) < 2:
        return {}
    cols, mets = lines[0][1:], lines[1][1:]
    out: dict = {}
    for row in lines[2:]:
        entry: dict = {}
        for col, met, cell in zip(cols, mets, row[1:]):
            entry.setdefault(col, {})[met] = _parse_cell(cell, met)
        out[row[0]] = entry
    return out


def _parse_cell(cell: str, metric: str):
    if "±" in cell:
        m, s = cell.split("±")
        return (float(m), float(s))
    return int(cell) if metric == "Num" else float(cell)
