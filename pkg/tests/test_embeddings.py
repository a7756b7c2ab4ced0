import logging

import numpy as np
import pytest

from dsextract.embeddings import (
    CHAR_VOCAB, PAD_CHAR, EmbeddingFormatError, load_word_embeddings, new_char_table, new_random_table,
    table_from_arrays,
)
from dsextract.tensor import Rng


def _write(tmp_path, text):
    p = tmp_path / "vec.txt"
    p.write_text(text, encoding="utf-8")
    return p


def test_load_with_header_and_unk_is_mean(tmp_path):
    t = load_word_embeddings(_write(tmp_path, "2 3\nTurmeric 1 2 3\npain 3 4 5\n"))
    assert t.dim == 3 and len(t) == 3
    assert np.array_equal(t.matrix.data[t.lookup("turmeric")], [1, 2, 3])
    assert t.lookup("TURMERIC") == t.lookup("turmeric")
    assert np.array_equal(t.matrix.data[t.lookup("zzz")], [2, 3, 4])
    assert not t.matrix.requires_grad


def test_load_without_header(tmp_path):
    t = load_word_embeddings(_write(tmp_path, "a 1 0\nb 0 1\n"), trainable=True)
    assert t.dim == 2 and t.matrix.requires_grad


def test_duplicate_token_keeps_first(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        t = load_word_embeddings(_write(tmp_path, "a 1 1\nA 9 9\n"))
    assert np.array_equal(t.matrix.data[t.lookup("a")], [1, 1])
    assert "duplicate" in caplog.text


@pytest.mark.parametrize("text", ["a 1 2\nb 1\n", "a 1 x\n", ""])
def test_malformed_files_raise(tmp_path, text):
    with pytest.raises(EmbeddingFormatError):
        load_word_embeddings(_write(tmp_path, text))


def test_ragged_row_reports_line(tmp_path):
    with pytest.raises(EmbeddingFormatError) as err:
        load_word_embeddings(_write(tmp_path, "a 1 2\nb 1 2\nc 1\n"))
    assert ":3:" in str(err.value)


def test_save_round_trip(tmp_path):
    t = new_random_table(["x", "y", "Y"], 4, Rng(0))
    assert len(t) == 3
    t.save(tmp_path / "out.txt")
    back = load_word_embeddings(tmp_path / "out.txt")
    assert back.tokens() == t.tokens()
    for tok in t.tokens():
        assert np.array_equal(back.matrix.data[back.lookup(tok)], t.matrix.data[t.lookup(tok)])


def test_random_table_bounds_and_validation():
    t = new_random_table(["a", "b"], 5, Rng(1), scale=0.1)
    assert np.abs(t.matrix.data).max() <= 0.1
    with pytest.raises(ValueError):
        new_random_table(["a"], 0, Rng(1))


def test_char_table_pad_row_is_zero():
    t = new_char_table(8, Rng(2))
    assert np.all(t.matrix.data[t.lookup(PAD_CHAR)] == 0)
    assert t.lookup("A") != t.lookup("a")
    assert len(t) == len(CHAR_VOCAB) + 1


def test_table_from_arrays_validates_indices():
    t = table_from_arrays(["a"], np.zeros((2, 3)), trainable=False)
    assert t.lookup("b") == 1
    with pytest.raises(ValueError):
        table_from_arrays(["a", "b"], np.zeros((2, 3)), trainable=False)
