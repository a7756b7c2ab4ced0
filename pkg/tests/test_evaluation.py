
import pytest
from hypothesis import given, settings, strategies as st

from dsextract.corpus import EntitySpan, RelationLabel
from dsextract.evaluation import (
    MICRO, PrfScore, RunSummary, format_mean_std, ner_score, parse_report_table, re_score, report_table,
)

P, N, R = RelationLabel.POSITIVE, RelationLabel.NEGATIVE, RelationLabel.NOT_RELATED


def test_ner_exact_match_examples():
    s = ner_score({"a": [EntitySpan("DS", 0, 2)]}, {"a": [EntitySpan("DS", 0, 2)]})
    assert (s.micro.precision, s.micro.recall, s.micro.f1, s.micro.support) == (1.0, 1.0, 1.0, 1)
    s = ner_score({"a": [EntitySpan("DS", 0, 2)]}, {"a": [EntitySpan("DS", 0, 3)]})
    assert (s.micro.tp, s.micro.fp, s.micro.fn, s.micro.f1) == (0, 1, 1, 0.0)


def test_ner_hand_computed_confusion():
    gold = {"a": [EntitySpan("DS", 0, 2), EntitySpan("Event", 4, 5)]}
    pred = {"a": [EntitySpan("DS", 0, 2), EntitySpan("Event", 3, 5), EntitySpan("DS", 6, 7)]}
    m = ner_score(gold, pred).micro
    assert m.precision == pytest.approx(1 / 3) and m.recall == 0.5 and m.f1 == pytest.approx(0.4)


def test_ner_mismatched_ids_raise():
    with pytest.raises(ValueError):
        ner_score({"a": []}, {"b": []})


def test_re_hand_computed_confusion():
    s = re_score([P, P, N], [P, N, N])
    assert s.get("Positive").precision == 1.0 and s.get("Positive").recall == 0.5
    assert s.get("Negative").precision == 0.5 and s.get("Negative").recall == 1.0
    assert s.micro.f1 == pytest.approx(2 / 3)
    assert s.get("Not related").support == 0 and s.get("Not related").undefined


def test_re_all_correct_and_errors():
    s = re_score([P, N, R], [P, N, R])
    assert all(s.get(c).f1 == 1.0 for c in s.columns())
    with pytest.raises(ValueError):
        re_score([P], [P, N])
    with pytest.raises(ValueError):
        re_score(["positive"], ["maybe"])


spans = st.lists(
    st.builds(lambda lab, s, n: EntitySpan(lab, s, s + n), st.sampled_from(["DS", "Event"]), st.integers(0, 15),
              st.integers(1, 3)),
    max_size=6,
)
span_docs = st.dictionaries(st.text("abc", min_size=1, max_size=3), spans, min_size=1, max_size=5)


@settings(max_examples=200)
@given(span_docs)
def test_perfect_prediction_identity(doc):
    s = ner_score(doc, doc)
    if s.micro.support:
        assert s.micro.f1 == 1.0


@settings(max_examples=200)
@given(span_docs, span_docs, st.randoms(use_true_random=False))
def test_order_invariance(gold, pred, rnd):
    pred = {k: pred.get(k, []) for k in gold}
    base = ner_score(gold, pred).micro
    keys = list(gold)
    rnd.shuffle(keys)
    g2 = {k: rnd.sample(list(gold[k]), len(gold[k])) for k in keys}
    p2 = {k: rnd.sample(list(pred[k]), len(pred[k])) for k in keys}
    assert ner_score(g2, p2).micro == base


@settings(max_examples=200)
@given(span_docs, span_docs)
def test_adding_a_correct_span_never_hurts(gold, pred):
    pred = {k: list(pred.get(k, [])) for k in gold}
    before = ner_score(gold, pred).micro
    for k, gs in gold.items():
        missing = [g for g in gs if g not in pred[k]]
        if missing:
            pred[k].append(missing[0])
            after = ner_score(gold, pred).micro
            assert after.recall >= before.recall and after.f1 >= before.f1
            break


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from([P, N, R]), st.sampled_from([P, N, R])), min_size=1, max_size=30))
def test_re_micro_equals_accuracy(pairs):
    gold, pred = zip(*pairs)
    s = re_score(list(gold), list(pred))
    acc = sum(g == p for g, p in pairs) / len(pairs)
    assert s.micro.precision == pytest.approx(acc) and s.micro.recall == pytest.approx(acc)


def test_prf_from_counts_degenerate():
    s = PrfScore.from_counts(0, 0, 0)
    assert s.f1 == 0.0 and s.undefined


def test_mean_std_format_matches_table_style():
    assert format_mean_std(0.8934, 0.0041) == "0.893 ± 0.004"


def test_report_table_round_trip():
    s = re_score([P, P, N, R], [P, N, N, R])
    text = report_table({"CNN": s}, "tsv")
    parsed = parse_report_table(text)
    assert parsed["CNN"][MICRO]["F1"] == pytest.approx(round(s.micro.f1, 3))
    assert parsed["CNN"]["Positive"]["Num"] == 2
    md = report_table({"CNN": s}, "markdown")
    assert md.startswith("| ") and "Overall (micro)" in md


def test_one_class_table_has_two_column_groups():
    s = ner_score({"a": [EntitySpan("DS", 0, 1)]}, {"a": []}, labels=("DS",))
    header = report_table({"m": s}).split("\n")[0].split("\t")
    assert sorted(set(header[1:])) == ["DS", MICRO]


def test_run_summary_renders_mean_and_std():
    runs = [re_score([P, N], [P, N]), re_score([P, N], [P, P])]
    summ = RunSummary(runs)
    assert summ.mean(MICRO, "F1") == pytest.approx(0.75)
    parsed = parse_report_table(report_table({"RF": summ}))
    mean, std = parsed["RF"][MICRO]["F1"]
    assert mean == 0.75 and std == pytest.approx(0.354, abs=1e-3)
    with pytest.raises(ValueError):
        RunSummary([])
    with pytest.raises(ValueError):
        report_table({"x": runs[0]}, "html")
