"""Inverted index over corpus tokens: keyword search, paging, sampling.

The index is immutable after build and shares the corpus it indexes;
posting lists keep corpus order so search results display stably.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .corpus import Comment, Corpus, Label, tokenize
from .errors import KeywordError


class PredFilter(enum.Enum):
    ALL = "all"
    TOXIC_ONLY = "toxic"
    NONTOXIC_ONLY = "nontoxic"

    @classmethod
    def parse(cls, raw: str) -> "PredFilter":
        try:
            return cls(raw)
        except ValueError:
            raise KeywordError(f"unknown filter {raw!r}") from None


@dataclass(frozen=True)
class SearchPage:
    total: int
    page_index: int
    page_size: int
    items: tuple[str, ...]


@dataclass(frozen=True)
class InvertedIndex:
    postings: dict  # token -> list of comment ids, corpus order, no dups
    doc_count: int
    corpus: Corpus = field(repr=False)

    def ids_for(self, keyword: str) -> list[str]:
        return self.postings.get(keyword, [])


def build_index(corpus: Corpus) -> InvertedIndex:
    postings: dict[str, list[str]] = {}
    for c in corpus.comments:
        seen = set()
        for token, _ in tokenize(c.text):
            if token not in seen:
                seen.add(token)
                postings.setdefault(token, []).append(c.id)
    return InvertedIndex(postings=postings, doc_count=len(corpus), corpus=corpus)


def _matches_filter(comment: Comment, pred_filter: PredFilter) -> bool:
    if pred_filter is PredFilter.ALL:
        return True
    # Comments without a prediction match only under ALL.
    if comment.pred is None:
        return False
    want = Label.TOXIC if pred_filter is PredFilter.TOXIC_ONLY else Label.NONTOXIC
    return comment.pred.label is want


def _require_normalized(keyword: str) -> None:
    toks = tokenize(keyword)
    if len(toks) != 1 or toks[0][0] != keyword:
        raise KeywordError(
            f"keyword {keyword!r} is not normalized; normalize it first"
        )


def search(
    index: InvertedIndex,
    keyword: str,
    pred_filter: PredFilter = PredFilter.ALL,
    page_index: int = 0,
    page_size: int = 10,
) -> SearchPage:
    """Page through the comments containing ``keyword``.

    The keyword must be normalized already (single lowercase token);
    unnormalized input is rejected rather than silently fixed.  An
    out-of-range page returns empty items with the correct total.
    """
    if page_size < 1:
        raise ValueError("page_size must be >= 1")
    if page_index < 0:
        raise ValueError("page_index must be >= 0")
    _require_normalized(keyword)
    corpus = index.corpus
    matched = [
        cid for cid in index.ids_for(keyword)
        if _matches_filter(corpus[cid], pred_filter)
    ]
    lo = page_index * page_size
    return SearchPage(
        total=len(matched),
        page_index=page_index,
        page_size=page_size,
        items=tuple(matched[lo:lo + page_size]),
    )


def random_sample(corpus: Corpus, k: int, seed: int) -> list[str]:
    """Draw k distinct comment ids uniformly, deterministically per seed."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ids = corpus.ids()
    return random.Random(seed).sample(ids, min(k, len(ids)))
