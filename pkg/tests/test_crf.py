import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsextract.corpus import TAGS
from dsextract.gradcheck import check_gradients
from dsextract.ner.crf import CrfParams, bio_masks, crf_log_partition, crf_nll, path_score, viterbi
from dsextract.tensor import Tensor, parameter

from oracles import brute_force_crf


def _random_crf(rng, L, K=5, constrained=False):
    p = CrfParams.zeros(K, constrained=constrained)
    p.transitions.data = rng.normal(size=(K, K))
    p.start.data = rng.normal(size=K)
    p.stop.data = rng.normal(size=K)
    return rng.normal(size=(L, K)), p


@given(st.integers(1, 5), st.integers(0, 2**31 - 1), st.booleans())
def test_partition_and_viterbi_match_enumeration(L, seed, constrained):
    e, p = _random_crf(np.random.default_rng(seed), L, constrained=constrained)
    logz, path, best = brute_force_crf(e, *p.effective_numpy())
    assert abs(crf_log_partition(e, p).item() - logz) < 1e-9
    got, score = viterbi(e, p)
    assert got == path
    assert abs(score - best) < 1e-9


def test_single_position_partition():
    e = np.array([[1.0, 2.0, 0.5, -1.0, 0.0]])
    p = CrfParams.zeros()
    assert crf_log_partition(e, p).item() == pytest.approx(np.log(np.exp(e).sum()), abs=1e-12)


def test_uniform_scores_partition_is_l_log_k():
    p = CrfParams.zeros(3, constrained=False)
    assert crf_log_partition(np.zeros((4, 3)), p).item() == pytest.approx(4 * np.log(3), abs=1e-12)


def test_viterbi_ties_take_lowest_index():
    p = CrfParams.zeros(5)
    assert viterbi(np.zeros((3, 5)), p)[0] == [0, 0, 0]


def test_constrained_paths_are_legal():
    rng = np.random.default_rng(3)
    for _ in range(50):
        e, p = _random_crf(rng, 6, constrained=True)
        e[:, [2, 4]] += 3.0  # push towards inside tags
        path = [TAGS[k] for k in viterbi(e, p)[0]]
        prev = "O"
        for t in path:
            if t.startswith("I-"):
                assert prev[2:] == t[2:]
            prev = t


def test_bio_masks_forbid_the_right_transitions():
    trans, start = bio_masks()
    assert np.isinf(start[TAGS.index("I-DS")]) and start[TAGS.index("B-DS")] == 0
    assert np.isinf(trans[TAGS.index("O"), TAGS.index("I-Event")])
    assert np.isinf(trans[TAGS.index("B-DS"), TAGS.index("I-Event")])
    assert trans[TAGS.index("B-DS"), TAGS.index("I-DS")] == 0


@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_nll_is_nonnegative(L, seed):
    rng = np.random.default_rng(seed)
    e, p = _random_crf(rng, L)
    gold = rng.integers(0, 5, size=L)
    assert crf_nll(e, gold, p).item() >= -1e-12


def test_nll_of_viterbi_path_is_smallest():
    rng = np.random.default_rng(9)
    e, p = _random_crf(rng, 4)
    best, _ = viterbi(e, p)
    other = [(k + 1) % 5 for k in best]
    assert crf_nll(e, best, p).item() < crf_nll(e, other, p).item()
    assert crf_nll(e, best, p).item() == pytest.approx(crf_log_partition(e, p).item() - path_score(e, best, p))


def test_constrained_gold_with_forbidden_transition_raises():
    p = CrfParams.zeros(constrained=True)
    with pytest.raises(ValueError):
        crf_nll(np.zeros((2, 5)), [TAGS.index("O"), TAGS.index("I-DS")], p)


def test_empty_emissions_rejected():
    with pytest.raises(ValueError):
        viterbi(np.zeros((0, 5)), CrfParams.zeros())
    with pytest.raises(ValueError):
        crf_log_partition(np.zeros((0, 5)), CrfParams.zeros())


def test_batched_nll_is_mean_of_rows():
    rng = np.random.default_rng(4)
    e = rng.normal(size=(3, 4, 5))
    gold = rng.integers(0, 5, size=(3, 4))
    _, p = _random_crf(rng, 4)
    rows = [crf_nll(e[b], gold[b], p).item() for b in range(3)]
    assert crf_nll(e, gold, p).item() == pytest.approx(np.mean(rows), abs=1e-12)


@pytest.mark.parametrize("constrained", [False, True])
def test_crf_nll_gradients(constrained):
    rng = np.random.default_rng(1)
    e0, p = _random_crf(rng, 4, constrained=constrained)
    e = parameter(e0)
    gold = [1, 2, 0, 3]
    errs = check_gradients(lambda: crf_nll(e, gold, p), [e, p.transitions, p.start, p.stop])
    assert max(errs.values()) < 1e-4


def test_partition_accepts_tensor_and_array():
    e = np.random.default_rng(0).normal(size=(3, 5))
    p = CrfParams.zeros()
    assert crf_log_partition(Tensor(e), p).item() == crf_log_partition(e, p).item()
