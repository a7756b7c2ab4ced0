import pytest
from hypothesis import given, strategies as st

from dsextract.corpus import (
    TAGS, CorpusFormatError, EntitySpan, IllegalTagSequence, Lexicon, RelationInstance, RelationLabel, Sentence,
    pair_instances, read_bio, read_relations, read_sentences, spans_to_tags, tags_to_spans, write_bio,
    write_relations, write_sentences,
)
from dsextract.synthetic import SyntheticConfig, generate_synthetic, typo
from dsextract.tensor import Rng


def test_tags_to_spans_basic():
    tags = ["B-DS", "I-DS", "O", "B-Event"]
    assert tags_to_spans(tags) == [EntitySpan("DS", 0, 2), EntitySpan("Event", 3, 4)]


def test_strict_rejects_dangling_inside_tag():
    with pytest.raises(IllegalTagSequence):
        tags_to_spans(["O", "I-Event"])
    with pytest.raises(IllegalTagSequence):
        tags_to_spans(["B-DS", "I-Event"])


def test_lenient_treats_dangling_inside_as_begin():
    assert tags_to_spans(["O", "I-Event", "I-Event"], mode="lenient") == [EntitySpan("Event", 1, 3)]
    assert tags_to_spans(["B-DS", "I-Event"], mode="lenient") == [EntitySpan("DS", 0, 1), EntitySpan("Event", 1, 2)]


def test_unknown_tag_and_mode():
    with pytest.raises(ValueError):
        tags_to_spans(["B-Drug"])
    with pytest.raises(ValueError):
        tags_to_spans(["O"], mode="loose")


def test_all_o_gives_no_spans():
    assert tags_to_spans(["O"] * 4) == []


@st.composite
def legal_tags(draw):
    n = draw(st.integers(1, 12))
    tags, prev = [], "O"
    for _ in range(n):
        choices = ["O", "B-DS", "B-Event"] + ([f"I-{prev[2:]}"] if prev != "O" else [])
        prev = draw(st.sampled_from(choices))
        tags.append(prev)
    return tags


@given(legal_tags())
def test_spans_tags_round_trip(tags):
    spans = tags_to_spans(tags)
    assert spans_to_tags(spans, len(tags)) == tags


def test_spans_to_tags_rejects_overlap_and_overflow():
    with pytest.raises(ValueError):
        spans_to_tags([EntitySpan("DS", 0, 2), EntitySpan("Event", 1, 3)], 4)
    with pytest.raises(ValueError):
        spans_to_tags([EntitySpan("DS", 2, 5)], 4)


def test_entity_span_head_is_last_token():
    assert EntitySpan("Event", 3, 6).head == 5


def test_bio_round_trip(tmp_path, toy_ner):
    write_bio(tmp_path / "c.bio", toy_ner)
    back = read_bio(tmp_path / "c.bio")
    assert [(s.tokens, t) for s, t in back] == [(s.tokens, t) for s, t in toy_ner]
    assert [s.id for s, _ in back] == ["0", "1"]


def test_read_bio_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.bio"
    p.write_text("a\tO\nb\tI-DS\n\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as err:
        read_bio(p)
    assert ":2:" in str(err.value)
    assert read_bio(p, strict=False)[0][1] == ["O", "I-DS"]
    p.write_text("a\tO\n\n\n\nb\tO\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_bio(p)
    p.write_text("a O\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_bio(p)
    p.write_text("a\tB-Drug\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_bio(p)


def test_relations_round_trip(tmp_path, toy_instance):
    write_relations(tmp_path / "r.tsv", [toy_instance])
    back = read_relations(tmp_path / "r.tsv")[0]
    assert back.id == toy_instance.id and back.label is RelationLabel.POSITIVE
    assert back.sentence.tokens == toy_instance.sentence.tokens
    assert back.group == "s1"


def test_read_relations_rejects_bad_rows(tmp_path):
    p = tmp_path / "r.tsv"
    p.write_text("x#0\ta b\t0\t1\t1\t9\tPositive\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_relations(p)
    p.write_text("x#0\ta b\t0\t1\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_relations(p)


def test_relation_label_parse():
    assert RelationLabel.parse("positive") is RelationLabel.POSITIVE
    assert RelationLabel.parse(" Not_Related ") is RelationLabel.NOT_RELATED
    with pytest.raises(ValueError):
        RelationLabel.parse("maybe")


def test_instance_validates_roles():
    s = Sentence("s", ["a", "b"])
    with pytest.raises(ValueError):
        RelationInstance("s#0", s, EntitySpan("Event", 0, 1), EntitySpan("Event", 1, 2))


def test_pair_instances_is_cartesian_product():
    s = Sentence("s", ["a", "b", "c", "d"])
    spans = [EntitySpan("Event", 3, 4), EntitySpan("DS", 0, 1), EntitySpan("DS", 1, 2), EntitySpan("Event", 2, 3)]
    pairs = pair_instances(s, spans)
    assert [(p.ds.start, p.event.start) for p in pairs] == [(0, 2), (0, 3), (1, 2), (1, 3)]
    assert [p.id for p in pairs] == ["s#0", "s#1", "s#2", "s#3"]


def test_lexicon_is_case_insensitive(tmp_path):
    lex = Lexicon({"Curcumin": "Turmeric"})
    assert lex.canonicalize("CURCUMIN") == "turmeric"
    assert lex.canonicalize("turmeric") == "turmeric"
    assert lex.canonicalize("Unknown Herb") == "unknown herb"
    lex.write(tmp_path / "lex.tsv")
    assert Lexicon.read(tmp_path / "lex.tsv").items() == lex.items()


def test_sentences_round_trip(tmp_path):
    sents = [Sentence("a", ["x", "y"]), Sentence("b", ["z"])]
    write_sentences(tmp_path / "s.txt", sents)
    assert [(s.id, list(s.tokens)) for s in read_sentences(tmp_path / "s.txt")] == [("a", ["x", "y"]), ("b", ["z"])]
    (tmp_path / "plain.txt").write_text("one two\n\nthree\n", encoding="utf-8")
    assert [s.id for s in read_sentences(tmp_path / "plain.txt")] == ["1", "3"]


# -- synthetic generator -----------------------------------------------------------

def test_generator_is_deterministic():
    cfg = SyntheticConfig(n_ner_sentences=50, n_re_sentences=30, n_discovery_sentences=40, discovery_triples=5)
    a, b = generate_synthetic(cfg, Rng(3)), generate_synthetic(cfg, Rng(3))
    assert [(s.tokens, t) for s, t in a.ner] == [(s.tokens, t) for s, t in b.ner]
    assert [(r.id, r.label) for r in a.relations] == [(r.id, r.label) for r in b.relations]


def test_generator_output_is_well_formed(small_corpus):
    assert len(small_corpus.ner) == 300
    for sent, tags in small_corpus.ner:
        assert len(tags) == len(sent)
        assert set(tags) <= set(TAGS)
        tags_to_spans(tags)
    labels = {r.label for r in small_corpus.relations}
    assert labels == set(RelationLabel)


def test_generator_class_mix_roughly_respected(small_corpus):
    n = len(small_corpus.relations)
    pos = sum(r.label is RelationLabel.POSITIVE for r in small_corpus.relations) / n
    assert 0.5 < pos < 0.85


def test_config_validation():
    with pytest.raises(ValueError):
        SyntheticConfig(class_mix=(0.5, 0.5, 0.5)).validate()
    with pytest.raises(ValueError):
        SyntheticConfig.from_dict({"bogus": 1})


def test_typo_keeps_first_letter_and_edits_once():
    rng = Rng(0)
    for _ in range(50):
        w = typo("nausea", rng)
        assert w != "nausea" and w[0] == "n"
        assert abs(len(w) - 6) <= 1
    assert typo("ab", rng) == "ab"
