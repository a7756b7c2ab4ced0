"""Sentence, span and relation data model plus the BIO / relation / lexicon file formats."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

ENTITY_LABELS = ("DS", "Event")
# O is index 0 so the all-ties Viterbi path is all-O
TAGS = ("O", "B-DS", "I-DS", "B-Event", "I-Event")
TAG_INDEX = {t: i for i, t in enumerate(TAGS)}


class CorpusFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class IllegalTagSequence(ValueError):
    def __init__(self, indices: Sequence[int], tags: Sequence[str]):
        self.indices = list(indices)
        detail = ", ".join(f"{i}:{tags[i]}" for i in self.indices)
        super().__init__(f"I- tag without matching B-/I- predecessor at {detail}")


class RelationLabel(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NOT_RELATED = "not_related"

    @property
    def index(self) -> int:
        return RELATION_LABELS.index(self)

    @classmethod
    def parse(cls, text: str) -> "RelationLabel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown relation label {text!r}; expected positive|negative|not_related") from None


RELATION_LABELS = (RelationLabel.POSITIVE, RelationLabel.NEGATIVE, RelationLabel.NOT_RELATED)


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} is empty")
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"sentence {self.id!r}: bad token {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self, start: int = 0, end: Optional[int] = None) -> str:
        return " ".join(self.tokens[start:end])


@dataclass(frozen=True)
class EntitySpan:
    label: str
    start: int
    end: int

    def __post_init__(self):
        if self.label not in ENTITY_LABELS:
            raise ValueError(f"unknown entity label {self.label!r}")
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span ({self.start}, {self.end})")

    @property
    def head(self) -> int:
        """Last token of the span."""
        return self.end - 1

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.start < other.end and other.start < self.end


def sort_spans(spans: Iterable[EntitySpan]) -> list:
    return sorted(spans, key=lambda s: (s.start, s.end, s.label))


@dataclass(frozen=True)
class RelationInstance:
    id: str
    sentence: Sentence
    ds: EntitySpan
    event: EntitySpan
    label: Optional[RelationLabel] = None

    def __post_init__(self):
        n = len(self.sentence)
        if self.ds.label != "DS" or self.event.label != "Event":
            raise ValueError(f"{self.id}: ds/event spans carry wrong labels")
        for span in (self.ds, self.event):
            if span.end > n:
                raise ValueError(f"{self.id}: span ({span.start}, {span.end}) exceeds sentence length {n}")

    @property
    def group(self) -> str:
        """Sentence identity shared by all pairs drawn from one sentence."""
        return self.sentence.id


# -- BIO conversion -----------------------------------------------------------

def spans_to_tags(spans: Iterable[EntitySpan], length: int) -> list:
    tags = ["O"] * length
    for span in sort_spans(spans):
        if span.end > length:
            raise ValueError(f"span ({span.start}, {span.end}) exceeds length {length}")
        if any(t != "O" for t in tags[span.start:span.end]):
            raise ValueError(f"overlapping span ({span.start}, {span.end})")
        tags[span.start] = f"B-{span.label}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.label}"
    return tags


def illegal_positions(tags: Sequence[str]) -> list:
    bad = []
    prev = "O"
    for i, tag in enumerate(tags):
        if tag.startswith("I-") and prev[2:] != tag[2:]:
            bad.append(i)
        prev = tag
    return bad


def tags_to_spans(tags: Sequence[str], mode: str = "strict") -> list:
    """Decode BIO tags. ``lenient`` treats a dangling I-X as B-X; ``strict`` raises."""
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be strict or lenient, got {mode!r}")
    for t in tags:
        if t not in TAG_INDEX:
            raise ValueError(f"unknown tag {t!r}")
    if mode == "strict":
        bad = illegal_positions(tags)
        if bad:
            raise IllegalTagSequence(bad, tags)
    spans = []
    start, label = None, None
    for i, tag in enumerate(list(tags) + ["O"]):
        kind, _, lab = tag.partition("-")
        continues = kind == "I" and label == lab
        if start is not None and not continues:
            spans.append(EntitySpan(label, start, i))
            start, label = None, None
        if kind in ("B", "I") and not continues:
            start, label = i, lab
    return spans


# -- BIO files ------------------------------------------------------------------

def read_bio(path, strict: bool = True) -> list:
    """Read ``token<TAB>tag`` lines, blank line between sentences.

    Returns ``(Sentence, tags)`` pairs; sentence ids are 0-based ordinals.
    """
    out: list = []
    toks: list = []
    tags: list = []
    blank_run = 0
    start_line = 1

    def flush():
        sent = Sentence(str(len(out)), toks)
        if strict:
            bad = illegal_positions(tags)
            if bad:
                raise CorpusFormatError(path, start_line + bad[0], str(IllegalTagSequence(bad, tags)))
        out.append((sent, list(tags)))

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                if toks:
                    flush()
                    toks, tags = [], []
                    blank_run = 1
                elif out:
                    blank_run += 1
                    if blank_run > 1:
                        raise CorpusFormatError(path, lineno, "empty sentence block")
                else:
                    raise CorpusFormatError(path, lineno, "empty sentence block")
                continue
            if blank_run > 1:
                raise CorpusFormatError(path, lineno, "empty sentence block")
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise CorpusFormatError(path, lineno, f"expected TOKEN<TAB>TAG, got {line!r}")
            if parts[1] not in TAG_INDEX:
                raise CorpusFormatError(path, lineno, f"unknown tag {parts[1]!r}")
            if not toks:
                start_line = lineno
            toks.append(parts[0])
            tags.append(parts[1])
            blank_run = 0
        if toks:
            flush()
    return out


def write_bio(path, corpus: Iterable) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent, tags in corpus:
            if len(tags) != len(sent):
                raise ValueError(f"sentence {sent.id}: {len(sent)} tokens but {len(tags)} tags")
            for tok, tag in zip(sent.tokens, tags):
                fh.write(f"{tok}\t{tag}\n")
            fh.write("\n")


# -- relation files -------------------------------------------------------------

def _instance_group(instance_id: str) -> str:
    return instance_id.rsplit("#", 1)[0]


def read_relations(path) -> list:
    """Tab-separated: id, tokens, ds_start, ds_end, event_start, event_end, label.

    An id of the form ``<sentence>#<k>`` marks pairs drawn from one sentence.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise CorpusFormatError(path, lineno, f"expected 7 tab-separated fields, got {len(parts)}")
            rid, text, a, b, c, d, lab = parts
            try:
                ds_s, ds_e, ev_s, ev_e = int(a), int(b), int(c), int(d)
                sent = Sentence(_instance_group(rid), text.split(" "))
                inst = RelationInstance(
                    rid, sent, EntitySpan("DS", ds_s, ds_e), EntitySpan("Event", ev_s, ev_e),
                    RelationLabel.parse(lab),
                )
            except ValueError as exc:
                raise CorpusFormatError(path, lineno, str(exc)) from None
            out.append(inst)
    return out


def write_relations(path, instances: Iterable[RelationInstance]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in instances:
            fields = [
                r.id, " ".join(r.sentence.tokens),
                str(r.ds.start), str(r.ds.end), str(r.event.start), str(r.event.end),
                r.label.value if r.label is not None else "",
            ]
            fh.write("\t".join(fields) + "\n")


def pair_instances(sentence: Sentence, spans: Sequence[EntitySpan]) -> list:
    """One unlabeled instance per DS x Event pair, in span order."""
    ds = [s for s in sort_spans(spans) if s.label == "DS"]
    ev = [s for s in sort_spans(spans) if s.label == "Event"]
    out = []
    for d in ds:
        for e in ev:
            out.append(RelationInstance(f"{sentence.id}#{len(out)}", sentence, d, e))
    return out


# -- lexicon and sentence files ------------------------------------------------

class Lexicon:
    """Case-insensitive surface form -> canonical DS name."""

    def __init__(self, mapping: Optional[dict] = None):
        self._map: dict = {}
        for surface, canon in (mapping or {}).items():
            self.add(surface, canon)

    def add(self, surface: str, canonical: str) -> None:
        canonical = canonical.lower()
        self._map[surface.lower()] = canonical
        self._map.setdefault(canonical, canonical)

    def canonical(self, surface: str) -> Optional[str]:
        return self._map.get(surface.lower())

    def canonicalize(self, surface: str) -> str:
        """Canonical name, or the lowercased surface when unknown."""
        return self._map.get(surface.lower(), surface.lower())

    def items(self) -> list:
        return sorted(self._map.items())

    def __contains__(self, surface: str) -> bool:
        return surface.lower() in self._map

    def __len__(self) -> int:
        return len(self._map)

    @classmethod
    def read(cls, path) -> "Lexicon":
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise CorpusFormatError(path, lineno, "expected SURFACE<TAB>CANONICAL")
                lex.add(parts[0], parts[1])
        return lex

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for surface, canon in self.items():
                fh.write(f"{surface}\t{canon}\n")


def read_sentences(path) -> list:
    """One whitespace-tokenized sentence per line, optionally ``id<TAB>tokens``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" in line:
                sid, text = line.split("\t", 1)
            else:
                sid, text = str(lineno), line
            try:
                out.append(Sentence(sid, text.split()))
            except ValueError as exc:
                raise CorpusFormatError(path, lineno, str(exc)) from None
    return out


def write_sentences(path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            fh.write(f"{s.id}\t{' '.join(s.tokens)}\n")


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
