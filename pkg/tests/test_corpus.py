import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condel.corpus import (
    Comment,
    Corpus,
    Label,
    Prediction,
    TokenSpan,
    contains,
    dump_corpus,
    load_corpus,
    tokenize,
)
from condel.errors import CorpusFormatError


def test_tokenize_basic():
    assert tokenize("Go fuck yourself.") == [
        ("go", TokenSpan(0, 2)),
        ("fuck", TokenSpan(3, 7)),
        ("yourself", TokenSpan(8, 16)),
    ]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_apostrophe():
    assert tokenize("I'm FINE") == [("i'm", TokenSpan(0, 3)), ("fine", TokenSpan(4, 8))]


def test_tokenize_apostrophe_edges():
    assert [t for t, _ in tokenize("'a b' it''s")] == ["a", "b", "it", "s"]
    assert [t for t, _ in tokenize("don't")] == ["don't"]


def test_tokenize_unicode_and_digits():
    assert [t for t, _ in tokenize("Café #42 naïve")] == ["café", "42", "naïve"]


@settings(max_examples=200)
@given(st.text(max_size=80))
def test_tokenize_round_trip(text):
    spans_seen = []
    for token, span in tokenize(text):
        assert text[span.start:span.end].lower() == token
        spans_seen.append(span)
    # sorted and non-overlapping
    for a, b in zip(spans_seen, spans_seen[1:]):
        assert a.end <= b.start


@given(st.text(max_size=80))
def test_tokenize_deterministic(text):
    assert tokenize(text) == tokenize(text)


def test_contains_token_not_substring(f1):
    assert contains(f1["c4"], "fuck")
    assert not contains(f1["c1"], "fuck")  # "fucking" is not "fuck"
    assert contains(f1["c1"], "fucking")


def test_contains_matches_token_set(f1):
    for c in f1.comments:
        tokens = {t for t, _ in tokenize(c.text)}
        for t in tokens:
            assert contains(c, t)
        assert not contains(c, "zzznope")


def test_load_f1_counts(f1):
    assert len(f1) == 6
    assert sum(1 for c in f1.comments if c.gold is Label.TOXIC) == 3
    assert sum(1 for c in f1.comments if c.pred and c.pred.label is Label.TOXIC) == 3
    assert [c.id for c in f1.comments] == ["c1", "c2", "c3", "c4", "c5", "c6"]


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    corpus = load_corpus(path)
    assert len(corpus) == 0


def test_load_unknown_label(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id":"a","text":"hi"}\n{"id":"b","text":"yo","gold":"spam"}\n')
    with pytest.raises(CorpusFormatError, match="unknown label.*line 2"):
        load_corpus(path)


def test_load_malformed_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id":"a","text":"hi"}\nnot json\n')
    with pytest.raises(CorpusFormatError, match="line 2"):
        load_corpus(path)


def test_load_duplicate_id(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text('{"id":"a","text":"hi"}\n{"id":"a","text":"yo"}\n')
    with pytest.raises(CorpusFormatError, match="duplicate id"):
        load_corpus(path)


def test_load_span_out_of_bounds(tmp_path):
    path = tmp_path / "oob.jsonl"
    path.write_text('{"id":"a","text":"hi","pred":"toxic","rationale":[[0,99]]}\n')
    with pytest.raises(CorpusFormatError, match="span out of bounds"):
        load_corpus(path)


def test_load_rejects_label_prob_mismatch(tmp_path):
    path = tmp_path / "mix.jsonl"
    path.write_text('{"id":"a","text":"hi","pred":"nontoxic","prob":0.9}\n')
    with pytest.raises(CorpusFormatError, match="inconsistent"):
        load_corpus(path)


def test_round_trip(tmp_path, f1):
    out = tmp_path / "copy.jsonl"
    dump_corpus(f1, out)
    again = load_corpus(out, name="f1")
    assert again == f1


def test_comment_requires_text():
    with pytest.raises(CorpusFormatError, match="empty text"):
        Corpus(name="x", comments=(Comment(id="a", text=""),))


def test_prediction_boundary_is_toxic():
    # prob exactly at the threshold counts as toxic
    pred = Prediction(label=Label.TOXIC, prob=0.5)
    Corpus(name="x", comments=(Comment(id="a", text="hi", pred=pred),))
    with pytest.raises(CorpusFormatError):
        bad = Prediction(label=Label.NONTOXIC, prob=0.5)
        Corpus(name="x", comments=(Comment(id="a", text="hi", pred=bad),))
