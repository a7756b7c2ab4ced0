import json

import pytest
from hypothesis import given, strategies as st

from dsextract.corpus import EntitySpan, Lexicon, RelationLabel, Sentence, spans_to_tags
from dsextract.discovery import (
    ClassifiedPair, KnowledgeBase, SignalPair, aggregate, compare_kb, discover, emit_report, extract_pairs,
    filter_threshold, known_summary, parse_report, percent, sample_examples,
)

P, N, R = RelationLabel.POSITIVE, RelationLabel.NEGATIVE, RelationLabel.NOT_RELATED


class DictTagger:
    """Tags single-token DS and Event words from fixed vocabularies."""

    def __init__(self, ds_words, event_words):
        self.ds, self.ev = set(ds_words), set(event_words)

    def predict(self, sentences):
        out = []
        for s in sentences:
            spans = [EntitySpan("DS" if t.lower() in self.ds else "Event", i, i + 1)
                     for i, t in enumerate(s.tokens) if t.lower() in self.ds | self.ev]
            out.append(spans_to_tags(spans, len(s)))
        return out


class CueClassifier:
    def predict(self, instances):
        out = []
        for inst in instances:
            toks = inst.sentence.tokens
            out.append(P if "helped" in toks else N if "caused" in toks else R)
        return out


def _pair(ds, ev, rel, n, start=0):
    return SignalPair(ds, ev, rel, n, None, tuple(f"s{start + i}" for i in range(n)))


def test_signal_pair_validation():
    with pytest.raises(ValueError):
        SignalPair("a", "b", R, 0)
    with pytest.raises(ValueError):
        SignalPair("a", "b", P, 2, None, ("x",))


def test_threshold_boundary_is_larger_than_ten():
    pairs = [_pair("a", "x", P, 10), _pair("b", "y", P, 11), _pair("c", "z", N, 12)]
    kept = filter_threshold(pairs)
    assert [p.ds for p in kept] == ["b", "c"]
    with pytest.raises(ValueError):
        filter_threshold(pairs, 0)


def test_percentages_match_reported_arithmetic():
    assert percent(94, 133) == "70.7%"
    assert known_summary(94, 133) == "94 (70.7%) known, 39 (29.3%) unknown"
    assert percent(0, 0) == "0.0%"


def test_compare_kb_flags_membership():
    kb = KnowledgeBase([("ginger", "nausea", "positive")])
    flagged, summary = compare_kb([_pair("ginger", "nausea", P, 11), _pair("ginger", "nausea", N, 11)], kb)
    assert [p.known for p in flagged] == [True, False]
    assert summary.counts == {"positive": (1, 1), "negative": (0, 1)}
    assert "1 (100.0%) known" in summary.text()


def test_kb_file_round_trip(tmp_path):
    kb = KnowledgeBase([("Ginger", "Nausea", "positive"), ("kava", "liver injury", "negative")])
    kb.write(tmp_path / "kb.tsv")
    assert KnowledgeBase.read(tmp_path / "kb.tsv").entries == kb.entries
    (tmp_path / "bad.tsv").write_text("a\tb\tnot_related\n", encoding="utf-8")
    with pytest.raises(ValueError):
        KnowledgeBase.read(tmp_path / "bad.tsv")


def test_aggregate_counts_sentences_and_canonicalizes():
    lex = Lexicon({"zingiber": "ginger"})
    s1 = Sentence("1", ["Ginger", "helped", "nausea"])
    s2 = Sentence("2", ["zingiber", "helped", "Nausea"])
    s3 = Sentence("3", ["ginger", "caused", "rash"])
    tagger, clf = DictTagger({"ginger", "zingiber"}, {"nausea", "rash"}), CueClassifier()
    classified = extract_pairs([s1, s2, s3], tagger, clf)
    pairs = aggregate(classified, lex)
    assert [(p.ds, p.event, p.relation, p.frequency) for p in pairs] == [
        ("ginger", "nausea", P, 2), ("ginger", "rash", N, 1)]
    assert pairs[0].source_ids == ("1", "2")


def test_aggregate_maps_event_synonyms():
    s = Sentence("1", ["ginger", "helped", "vomiting"])
    classified = [ClassifiedPair(c.instance, P) for c in
                  extract_pairs([s], DictTagger({"ginger"}, {"vomiting"}), CueClassifier())]
    pairs = aggregate(classified, Lexicon(), {"vomiting": "nausea"})
    assert pairs[0].event == "nausea"


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), st.sampled_from([P, N, R])), max_size=40))
def test_conservation_of_classified_pairs(rows):
    sentences = []
    classified = []
    for k, (d, e, lab) in enumerate(rows):
        s = Sentence(f"s{k}", [f"ds{d}", "and", f"ev{e}"])
        inst = extract_pairs([s], DictTagger({f"ds{d}"}, {f"ev{e}"}), CueClassifier())[0].instance
        sentences.append(s)
        classified.append(ClassifiedPair(inst, lab))
    pairs = aggregate(classified, Lexicon())
    assert sum(p.frequency for p in pairs) == sum(1 for _, _, lab in rows if lab is not R)
    for t in (0, 1, 2):
        kept = filter_threshold(pairs, t + 1)
        assert all(p.frequency > t for p in kept)
        assert len(kept) == sum(1 for p in pairs if p.frequency > t)


def test_sort_order_positive_first_then_frequency():
    pairs = [_pair("b", "x", N, 30), _pair("a", "x", P, 12), _pair("c", "y", P, 20), _pair("a", "y", P, 20, 50)]
    text = emit_report(pairs, n_examples=0)
    order = [tuple(line.split("\t")[:3]) for line in text.splitlines()[1:]]
    assert order == [("a", "y", "positive"), ("c", "y", "positive"), ("a", "x", "positive"), ("b", "x", "negative")]


def test_report_round_trip_and_examples():
    pairs = [_pair("ginger", "nausea", P, 12)]
    sents = {f"s{i}": Sentence(f"s{i}", ["sentence", str(i)]) for i in range(12)}
    flagged, summary = compare_kb(pairs, KnowledgeBase())
    text = emit_report(flagged, "tsv", sents, n_examples=3, seed=1, summary=summary)
    back = parse_report(text)
    assert back == flagged
    assert text.splitlines()[1].split("\t")[-1].count(" ||| ") == 2
    assert emit_report(flagged, "tsv", sents, 3, seed=1) == emit_report(flagged, "tsv", sents, 3, seed=1)
    doc = json.loads(emit_report(flagged, "json", sents, 3, seed=1, summary=summary))
    assert doc["pairs"][0]["known"] is False and len(doc["pairs"][0]["examples"]) == 3
    with pytest.raises(ValueError):
        emit_report(flagged, "xml")


def test_sample_examples_bounds():
    p = _pair("a", "b", P, 5)
    assert sample_examples(p, 10) == list(p.source_ids)
    picked = sample_examples(p, 2, seed=3)
    assert len(picked) == 2 and picked == sorted(picked, key=p.source_ids.index)
    assert sample_examples(p, 0) == []


def test_discover_end_to_end_on_tiny_input():
    sents = [Sentence(str(i), ["ginger", "helped", "nausea"]) for i in range(12)]
    sents += [Sentence("x", ["kava", "caused", "rash"])]
    kb = KnowledgeBase([("ginger", "nausea", "positive")])
    res = discover(sents, DictTagger({"ginger", "kava"}, {"nausea", "rash"}), CueClassifier(), Lexicon(), kb)
    assert [(p.ds, p.frequency, p.known) for p in res.kept] == [("ginger", 12, True)]
    assert len(res.pairs) == 2
    assert res.summary.line(P) == "1 (100.0%) known, 0 (0.0%) unknown"
