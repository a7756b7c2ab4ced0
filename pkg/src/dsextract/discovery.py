"""Signal discovery: tag, pair, classify, canonicalize, count, threshold, compare to a KB."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import CorpusFormatError, Lexicon, RelationLabel, Sentence, pair_instances
from .tensor import Rng

SIGNAL_RELATIONS = (RelationLabel.POSITIVE, RelationLabel.NEGATIVE)
EXAMPLE_SEP = " ||| "
TSV_COLUMNS = ("ds", "event", "relation", "frequency", "known", "source_ids", "examples")


@dataclass(frozen=True)
class ClassifiedPair:
    instance: object  # RelationInstance
    label: RelationLabel


@dataclass(frozen=True)
class SignalPair:
    ds: str
    event: str
    relation: RelationLabel
    frequency: int
    known: Optional[bool] = None
    source_ids: tuple = ()

    def __post_init__(self):
        if self.relation not in SIGNAL_RELATIONS:
            raise ValueError("a signal pair must be positive or negative")
        if self.frequency != len(self.source_ids):
            raise ValueError(f"frequency {self.frequency} != {len(self.source_ids)} source sentences")

    @property
    def key(self) -> tuple:
        return (self.ds, self.event, self.relation.value)


class KnowledgeBase:
    """Known (ds, event, relation) triples, all lowercase."""

    def __init__(self, entries: Iterable[tuple] = ()):
        self.entries: set = set()
        for ds, ev, rel in entries:
            self.add(ds, ev, rel)

    def add(self, ds: str, event: str, relation) -> None:
        rel = RelationLabel.parse(relation) if isinstance(relation, str) else relation
        if rel not in SIGNAL_RELATIONS:
            raise ValueError("knowledge-base relations must be positive or negative")
        self.entries.add((ds.lower(), event.lower(), rel.value))

    def __contains__(self, triple: tuple) -> bool:
        return triple in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def read(cls, path) -> "KnowledgeBase":
        kb = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorpusFormatError(path, lineno, "expected DS<TAB>EVENT<TAB>RELATION")
                try:
                    kb.add(*parts)
                except ValueError as exc:
                    raise CorpusFormatError(path, lineno, str(exc)) from None
        return kb

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for ds, ev, rel in sorted(self.entries):
                fh.write(f"{ds}\t{ev}\t{rel}\n")


def read_synonyms(path) -> dict:
    """Two-column TSV mapping an event surface form to its canonical term."""
    lex = Lexicon.read(path)
    return dict(lex.items())


# -- pipeline stages ---------------------------------------------------------------

def extract_pairs(sentences: Sequence[Sentence], ner_model, re_model) -> list:
    """Tag every sentence; classify each DS x Event pair of sentences having both."""
    from .ner import predict_spans

    spans = predict_spans(ner_model, sentences)
    instances = []
    for s in sentences:
        found = spans[s.id]
        if any(sp.label == "DS" for sp in found) and any(sp.label == "Event" for sp in found):
            instances.extend(pair_instances(s, found))
    labels = re_model.predict(instances) if instances else []
    return [ClassifiedPair(i, RelationLabel(lab)) for i, lab in zip(instances, labels)]


def canonical_event(surface: str, synonyms: Optional[Mapping] = None) -> str:
    low = surface.lower()
    return synonyms.get(low, low) if synonyms else low


def aggregate(classified: Sequence[ClassifiedPair], lexicon: Lexicon,
              event_synonyms: Optional[Mapping] = None) -> list:
    """Count source sentences per canonical (ds, event, relation); NotRelated is dropped."""
    sources: dict = {}
    for cp in classified:
        if cp.label not in SIGNAL_RELATIONS:
            continue
        inst = cp.instance
        ds = lexicon.canonicalize(inst.sentence.text(inst.ds.start, inst.ds.end))
        ev = canonical_event(inst.sentence.text(inst.event.start, inst.event.end), event_synonyms)
        ids = sources.setdefault((ds, ev, cp.label), [])
        if inst.sentence.id not in ids:
            ids.append(inst.sentence.id)
    pairs = [SignalPair(ds, ev, rel, len(ids), None, tuple(ids)) for (ds, ev, rel), ids in sources.items()]
    return sort_pairs(pairs)


def sort_pairs(pairs: Iterable[SignalPair]) -> list:
    return sorted(pairs, key=lambda p: (SIGNAL_RELATIONS.index(p.relation), -p.frequency, p.ds, p.event))


def filter_threshold(pairs: Sequence[SignalPair], min_freq: int = 11) -> list:
    """Keep pairs seen in at least ``min_freq`` source sentences (default: more than ten)."""
    if min_freq < 1:
        raise ValueError("min_freq must be at least 1")
    return [p for p in pairs if p.frequency >= min_freq]


def percent(part: int, whole: int) -> str:
    return f"{100.0 * part / whole:.1f}%" if whole else "0.0%"


def known_summary(known: int, total: int) -> str:
    return f"{known} ({percent(known, total)}) known, {total - known} ({percent(total - known, total)}) unknown"


@dataclass
class KbSummary:
    counts: dict = field(default_factory=dict)  # relation value -> (known, total)

    def line(self, relation: RelationLabel) -> str:
        known, total = self.counts.get(relation.value, (0, 0))
        return known_summary(known, total)

    def text(self) -> str:
        rows = []
        for rel in SIGNAL_RELATIONS:
            total = self.counts.get(rel.value, (0, 0))[1]
            rows.append(f"{rel.value}: {total} signals, {self.line(rel)}")
        return "\n".join(rows) + "\n"


def compare_kb(pairs: Sequence[SignalPair], kb: KnowledgeBase) -> tuple:
    """Flag each pair known/unknown by triple membership; returns (pairs, summary)."""
    flagged = [replace(p, known=p.key in kb) for p in pairs]
    summary = KbSummary()
    for rel in SIGNAL_RELATIONS:
        mine = [p for p in flagged if p.relation == rel]
        summary.counts[rel.value] = (sum(1 for p in mine if p.known), len(mine))
    return flagged, summary


# -- reports -----------------------------------------------------------------------

def sample_examples(pair: SignalPair, n: int, seed: int = 0) -> list:
    """Up to ``n`` source ids drawn without replacement, seeded per pair, in source order."""
    if n <= 0 or not pair.source_ids:
        return []
    if len(pair.source_ids) <= n:
        return list(pair.source_ids)
    rng = Rng(seed).child("|".join(pair.key))
    chosen = sorted(rng.choice(len(pair.source_ids), size=n, replace=False))
    return [pair.source_ids[i] for i in chosen]


def _known_cell(known: Optional[bool]) -> str:
    return "" if known is None else ("yes" if known else "no")


def emit_report(pairs: Sequence[SignalPair], fmt: str = "tsv", sentences: Optional[Mapping] = None,
                n_examples: int = 10, seed: int = 0, summary: Optional[KbSummary] = None) -> str:
    """Render sorted pairs with up to ``n_examples`` example sentences each."""
    if fmt not in ("tsv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    sentences = sentences or {}
    rows = []
    for p in sort_pairs(pairs):
        ids = sample_examples(p, n_examples, seed)
        examples = [sentences[i].text() if hasattr(sentences[i], "text") else str(sentences[i])
                    for i in ids if i in sentences]
        rows.append((p, examples))
    if fmt == "json":
        doc = {
            "pairs": [
                {"ds": p.ds, "event": p.event, "relation": p.relation.value, "frequency": p.frequency,
                 "known": p.known, "source_ids": list(p.source_ids), "examples": ex}
                for p, ex in rows
            ],
        }
        if summary is not None:
            doc["summary"] = {rel: {"known": k, "total": t} for rel, (k, t) in sorted(summary.counts.items())}
        return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"
    lines = ["\t".join(TSV_COLUMNS)]
    for p, ex in rows:
        lines.append("\t".join([
            p.ds, p.event, p.relation.value, str(p.frequency), _known_cell(p.known),
            ",".join(p.source_ids), EXAMPLE_SEP.join(ex),
        ]))
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> list:
    """Inverse of the TSV report (example sentences are dropped)."""
    lines = text.rstrip("\n").split("\n")
    if not lines or lines[0].split("\t") != list(TSV_COLUMNS):
        raise ValueError("not a signal report: unexpected header")
    out = []
    for line in lines[1:]:
        ds, ev, rel, freq, known, ids, _ = line.split("\t")
        flag = None if known == "" else known == "yes"
        out.append(SignalPair(ds, ev, RelationLabel.parse(rel), int(freq), flag, tuple(ids.split(",")) if ids else ()))
    return out


@dataclass
class DiscoveryResult:
    classified: list
    pairs: list
    kept: list
    summary: KbSummary


def discover(sentences: Sequence[Sentence], ner_model, re_model, lexicon: Lexicon, kb: KnowledgeBase,
             min_freq: int = 11, event_synonyms: Optional[Mapping] = None) -> DiscoveryResult:
    classified = extract_pairs(sentences, ner_model, re_model)
    pairs = aggregate(classified, lexicon, event_synonyms)
    kept, summary = compare_kb(filter_threshold(pairs, min_freq), kb)
    return DiscoveryResult(classified, pairs, kept, summary)
