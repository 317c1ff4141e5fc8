import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dctsent.embeddings import EmbeddingTable, load_table, lookup_sentence, tokenize, write_table
from dctsent.errors import DimensionMismatchError, EmptyInputError, ParseError


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.vec"
    path.write_text("2 3\na 1 0 0\nb 0 1 0\n", encoding="utf-8")
    return path


def test_load_with_header(tiny):
    table = load_table(tiny)
    assert table.dim == 3
    assert len(table) == 2
    np.testing.assert_array_equal(table["b"], [0, 1, 0])
    assert table.source_path == str(tiny)


def test_load_limit(tiny):
    table = load_table(tiny, limit=1)
    assert table.words == ("a",)
    assert table.dim == 3


def test_headerless(tmp_path):
    path = tmp_path / "w2v.txt"
    path.write_text("x 0.5 1.5\ny -1 2\n", encoding="utf-8")
    table = load_table(path)
    assert table.dim == 2
    assert table.words == ("x", "y")


def test_dimension_mismatch_names_line(tmp_path):
    path = tmp_path / "bad.vec"
    path.write_text("3 3\na 1 0 0\nb 0 1 0\nc 1 2\n", encoding="utf-8")
    with pytest.raises(DimensionMismatchError) as exc:
        load_table(path)
    assert exc.value.line == 4


def test_malformed_float_names_line(tmp_path):
    path = tmp_path / "bad.vec"
    path.write_text("a 1 0\nb 0 x\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_table(path)
    assert exc.value.line == 2


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "nan.vec"
    path.write_text("a 1 nan\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_table(path)


@pytest.mark.parametrize("content", ["", "\n\n", "5 3\n"])
def test_empty_file(tmp_path, content):
    path = tmp_path / "empty.vec"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(EmptyInputError):
        load_table(path)


def test_duplicates_keep_first(tmp_path, caplog):
    path = tmp_path / "dup.vec"
    path.write_text("a 1 1\nb 2 2\na 3 3\n", encoding="utf-8")
    table = load_table(path)
    assert table.words == ("a", "b")
    np.testing.assert_array_equal(table["a"], [1, 1])
    assert "duplicate" in caplog.text


def test_table_is_immutable(tiny):
    table = load_table(tiny)
    with pytest.raises(ValueError):
        table.vectors[0, 0] = 5.0


words = st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")), min_size=1, max_size=8)


@settings(max_examples=40, deadline=None)
@given(
    vocab=st.lists(words, min_size=1, max_size=20, unique=True),
    dim=st.integers(1, 6),
    seed=st.integers(0, 2**32 - 1),
    header=st.booleans(),
)
def test_round_trip(tmp_path_factory, vocab, dim, seed, header):
    vecs = np.random.default_rng(seed).normal(scale=10, size=(len(vocab), dim))
    table = EmbeddingTable(tuple(vocab), vecs)
    path = tmp_path_factory.mktemp("rt") / "t.vec"
    write_table(table, path, header=header)
    back = load_table(path)
    assert back.words == table.words
    assert back.dim == table.dim
    np.testing.assert_allclose(back.vectors, table.vectors, rtol=0, atol=1e-6)


def test_tokenize():
    assert tokenize("The cat sat") == ["the", "cat", "sat"]
    assert tokenize("  ") == []
    assert tokenize("a\tb") == ["a", "b"]
    assert tokenize("A　B C", lowercase=False) == ["A", "B", "C"]


def test_lookup_sentence(tiny):
    table = load_table(tiny)
    m = lookup_sentence(table, ["a", "b"])
    np.testing.assert_array_equal(m.rows, [[1, 0, 0], [0, 1, 0]])
    m = lookup_sentence(table, ["a", "zzz"], "skip")
    assert m.n_words == 1 and m.n_oov == 1
    m = lookup_sentence(table, ["a", "zzz"], "zero")
    np.testing.assert_array_equal(m.rows, [[1, 0, 0], [0, 0, 0]])
    m = lookup_sentence(table, ["zzz"], "skip")
    assert m.is_empty and m.dim == 3


@settings(max_examples=50, deadline=None)
@given(tokens=st.lists(st.sampled_from(["a", "b", "x", "y"]), max_size=12))
def test_lookup_row_count(tokens):
    table = EmbeddingTable(("a", "b"), np.eye(2))
    n_oov = sum(t not in ("a", "b") for t in tokens)
    assert lookup_sentence(table, tokens, "skip").n_words == len(tokens) - n_oov
    assert lookup_sentence(table, tokens, "zero").n_words == len(tokens)
