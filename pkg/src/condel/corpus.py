"""Comments, labels, predictions, tokenization, and corpus ingestion.

A corpus is an immutable ordered collection of comments loaded from a
JSONL file, one object per line:

    {"id": "c1", "text": "you are a fucking idiot", "gold": "toxic",
     "pred": "toxic", "prob": 0.97, "rationale": [[10, 17], [18, 23]]}

``gold``, ``pred``, ``prob`` and ``rationale`` are optional.  Rationales
are stored as character spans (Unicode code point offsets) rather than
token indices so imported rationales survive tokenizer changes.
"""

from __future__ import annotations

import enum
import functools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ._native import tokenize_spans
from .errors import CorpusFormatError


class Label(enum.Enum):
    TOXIC = "toxic"
    NONTOXIC = "nontoxic"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, raw: str) -> "Label":
        try:
            return cls(raw)
        except ValueError:
            raise CorpusFormatError(f"unknown label {raw!r}") from None


@dataclass(frozen=True, order=True)
class TokenSpan:
    """Half-open character range [start, end) within one comment's text."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise CorpusFormatError(f"invalid span [{self.start},{self.end})")

    def overlaps(self, other: "TokenSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Prediction:
    """Model output for one comment.

    ``prob`` is the toxic-class probability; it may be absent for
    imported label-only predictions.  When present, the label must agree
    with the owning corpus's decision threshold (toxic iff prob >=
    threshold; the boundary itself counts as toxic).
    """

    label: Label
    prob: float | None = None
    rationale: tuple[TokenSpan, ...] = ()


@dataclass(frozen=True)
class Comment:
    id: str
    text: str
    gold: Label | None = None
    pred: Prediction | None = None

    def tokens(self) -> list[tuple[str, TokenSpan]]:
        return tokenize(self.text)

    def token_set(self) -> frozenset[str]:
        return _token_set(self.text)


@dataclass(frozen=True)
class Corpus:
    """Immutable after construction; safe for concurrent readers."""

    name: str
    comments: tuple[Comment, ...]
    threshold: float = 0.5
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.name:
            raise CorpusFormatError("corpus name must be non-empty")
        if not (0.0 <= self.threshold <= 1.0):
            raise CorpusFormatError(f"threshold {self.threshold} outside [0,1]")
        by_id = {}
        for c in self.comments:
            if c.id in by_id:
                raise CorpusFormatError(f"duplicate id {c.id!r}")
            _validate_comment(c, self.threshold)
            by_id[c.id] = c
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self):
        return len(self.comments)

    def __getitem__(self, comment_id: str) -> Comment:
        return self._by_id[comment_id]

    def __contains__(self, comment_id: str) -> bool:
        return comment_id in self._by_id

    def ids(self) -> list[str]:
        return [c.id for c in self.comments]

    def with_comments(self, comments, threshold=None) -> "Corpus":
        return Corpus(
            name=self.name,
            comments=tuple(comments),
            threshold=self.threshold if threshold is None else threshold,
        )


def tokenize(text: str) -> list[tuple[str, TokenSpan]]:
    """Split text into (lowercase token, span) pairs.

    Tokens are maximal runs of Unicode alphanumerics; an apostrophe is
    part of a token only when embedded between alphanumerics, so
    "I'm FINE" gives [("i'm", 0..3), ("fine", 4..8)].  Spans are sorted
    and non-overlapping by construction; empty input gives [].
    """
    return [(text[s:e].lower(), TokenSpan(s, e)) for s, e in tokenize_spans(text)]


@functools.lru_cache(maxsize=200_000)
def _token_set(text: str) -> frozenset[str]:
    return frozenset(text[s:e].lower() for s, e in tokenize_spans(text))


def contains(comment: Comment, keyword: str) -> bool:
    """True iff ``keyword`` equals some token of the comment.

    Exact token match, not substring: "fucking" does not contain "fuck".
    The keyword must already be normalized (see rules.normalize_keyword).
    """
    return keyword in _token_set(comment.text)


def _validate_comment(c: Comment, threshold: float) -> None:
    if not c.text:
        raise CorpusFormatError(f"comment {c.id!r} has empty text")
    if c.pred is None:
        return
    n = len(c.text)
    prev_end = -1
    for span in c.pred.rationale:
        if span.end > n:
            raise CorpusFormatError(f"span out of bounds in comment {c.id!r}")
        if span.start < prev_end:
            raise CorpusFormatError(
                f"rationale spans unsorted or overlapping in comment {c.id!r}"
            )
        prev_end = span.end
    prob = c.pred.prob
    if prob is not None:
        if not (0.0 <= prob <= 1.0):
            raise CorpusFormatError(f"prob outside [0,1] in comment {c.id!r}")
        expected = Label.TOXIC if prob >= threshold else Label.NONTOXIC
        if c.pred.label is not expected:
            raise CorpusFormatError(
                f"label {c.pred.label} inconsistent with prob {prob} "
                f"and threshold {threshold} in comment {c.id!r}"
            )


def _comment_from_obj(obj: dict, line: int) -> Comment:
    if not isinstance(obj, dict):
        raise CorpusFormatError("expected a JSON object", line)
    try:
        cid = obj["id"]
        text = obj["text"]
    except KeyError as e:
        raise CorpusFormatError(f"missing field {e.args[0]!r}", line) from None
    if not isinstance(cid, str) or not isinstance(text, str):
        raise CorpusFormatError("id and text must be strings", line)

    gold = None
    if obj.get("gold") is not None:
        try:
            gold = Label.parse(obj["gold"])
        except CorpusFormatError as e:
            raise CorpusFormatError(str(e), line) from None

    pred = None
    if obj.get("pred") is not None:
        try:
            label = Label.parse(obj["pred"])
        except CorpusFormatError as e:
            raise CorpusFormatError(str(e), line) from None
        prob = obj.get("prob")
        if prob is not None and not isinstance(prob, (int, float)):
            raise CorpusFormatError("prob must be a number", line)
        spans = []
        for pair in obj.get("rationale") or []:
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise CorpusFormatError("rationale entries must be [start, end]", line)
            try:
                spans.append(TokenSpan(int(pair[0]), int(pair[1])))
            except (CorpusFormatError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"bad rationale span ({e})", line) from None
        pred = Prediction(
            label=label,
            prob=None if prob is None else float(prob),
            rationale=tuple(spans),
        )
    elif obj.get("rationale"):
        raise CorpusFormatError("rationale without pred", line)

    return Comment(id=cid, text=text, gold=gold, pred=pred)


def load_corpus(path, *, name: str | None = None, threshold: float = 0.5) -> Corpus:
    """Read a JSONL corpus file, validating every invariant.

    ``name`` defaults to the file stem.  Errors carry 1-based line
    numbers.  An empty file yields an empty corpus.
    """
    path = Path(path)
    comments = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"malformed JSON ({e.msg})", lineno) from None
            comments.append(_comment_from_obj(obj, lineno))
    return Corpus(
        name=name or path.stem,
        comments=tuple(comments),
        threshold=threshold,
    )


def comment_to_obj(c: Comment) -> dict:
    obj: dict = {"id": c.id, "text": c.text}
    if c.gold is not None:
        obj["gold"] = c.gold.value
    if c.pred is not None:
        obj["pred"] = c.pred.label.value
        if c.pred.prob is not None:
            obj["prob"] = c.pred.prob
        obj["rationale"] = [[s.start, s.end] for s in c.pred.rationale]
    return obj


def dump_corpus(corpus: Corpus, path) -> None:
    """Write JSONL such that load_corpus reproduces the corpus exactly."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for c in corpus.comments:
            fh.write(json.dumps(comment_to_obj(c), ensure_ascii=False) + "\n")


def strip_predictions(corpus: Corpus) -> Corpus:
    return corpus.with_comments(replace(c, pred=None) for c in corpus.comments)


def strip_gold(corpus: Corpus) -> Corpus:
    return corpus.with_comments(replace(c, gold=None) for c in corpus.comments)
