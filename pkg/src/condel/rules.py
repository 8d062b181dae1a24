"""Keyword rules, rule sets, per-rule match stats, and reported sets.

A rule is a single normalized token plus the set-level delegation mode:

* ``delegation`` reports a matching comment only when the model predicts
  it toxic (the trustworthy-region reading of a keyword).
* ``report_all`` reports every matching comment, AutoModerator style.

Rule sets are immutable values; add/remove return new sets.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, replace

from .corpus import Corpus, Label, tokenize
from .errors import DuplicateRuleError, KeywordError, MissingPredictionError, MissingRuleError
from .index import InvertedIndex


class RuleMode(enum.Enum):
    DELEGATION = "delegation"
    REPORT_ALL = "report_all"

    @classmethod
    def parse(cls, raw: str) -> "RuleMode":
        try:
            return cls(raw)
        except ValueError:
            raise KeywordError(f"unknown mode {raw!r}") from None


@dataclass(frozen=True)
class Rule:
    keyword: str
    created_at: float = 0.0


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...] = ()
    mode: RuleMode = RuleMode.DELEGATION

    def keywords(self) -> list[str]:
        return [r.keyword for r in self.rules]

    def __len__(self):
        return len(self.rules)

    def __contains__(self, keyword: str) -> bool:
        return any(r.keyword == keyword for r in self.rules)


@dataclass(frozen=True)
class RuleStats:
    total_matched: int
    predicted_toxic_matched: int


def normalize_keyword(raw: str) -> str:
    """Trim, lowercase, and reduce the input to its single token.

    Surrounding punctuation is dropped with the rest of the non-token
    characters ("don't!" normalizes to "don't"), but input that holds
    more than one token, or none, is an error rather than a guess.
    """
    stripped = raw.strip().lower()
    if not stripped:
        raise KeywordError("empty keyword")
    toks = tokenize(stripped)
    if len(toks) == 0:
        raise KeywordError("token-free keyword")
    if len(toks) > 1:
        raise KeywordError("multi-token keyword")
    return toks[0][0]


def add_rule(ruleset: RuleSet, raw: str, created_at: float | None = None) -> RuleSet:
    keyword = normalize_keyword(raw)
    if keyword in ruleset:
        raise DuplicateRuleError("duplicate rule")
    at = time.time() if created_at is None else created_at
    return replace(ruleset, rules=ruleset.rules + (Rule(keyword, at),))


def remove_rule(ruleset: RuleSet, raw: str) -> RuleSet:
    keyword = normalize_keyword(raw)
    if keyword not in ruleset:
        raise MissingRuleError(f"no such rule {keyword!r}")
    return replace(
        ruleset, rules=tuple(r for r in ruleset.rules if r.keyword != keyword)
    )


def rule_stats(index: InvertedIndex, corpus: Corpus, rule: Rule | str) -> RuleStats:
    """Total matches and predicted-toxic matches for one rule."""
    keyword = rule.keyword if isinstance(rule, Rule) else rule
    ids = index.ids_for(keyword)
    toxic = sum(
        1
        for cid in ids
        if (p := corpus[cid].pred) is not None and p.label is Label.TOXIC
    )
    return RuleStats(total_matched=len(ids), predicted_toxic_matched=toxic)


def reported_set(
    index: InvertedIndex,
    corpus: Corpus,
    ruleset: RuleSet,
    strict: bool = True,
) -> set[str]:
    """Comment ids the ruleset reports, deduplicated across rules.

    delegation: contains any rule's keyword AND predicted toxic.
    report_all: contains any rule's keyword.

    In strict mode, delegation requires every matched comment to carry a
    prediction; non-strict treats missing predictions as not reportable.
    """
    matched: set[str] = set()
    for rule in ruleset.rules:
        matched.update(index.ids_for(rule.keyword))
    if ruleset.mode is RuleMode.REPORT_ALL:
        return matched
    reported = set()
    for cid in matched:
        pred = corpus[cid].pred
        if pred is None:
            if strict:
                raise MissingPredictionError(
                    f"comment {cid!r} matched under delegation but has no prediction"
                )
            continue
        if pred.label is Label.TOXIC:
            reported.add(cid)
    return reported


def ruleset_to_json(ruleset: RuleSet) -> str:
    return json.dumps({"mode": ruleset.mode.value, "rules": ruleset.keywords()})


def ruleset_from_obj(obj: dict) -> RuleSet:
    if not isinstance(obj, dict) or "rules" not in obj:
        raise KeywordError("ruleset must be an object with a 'rules' list")
    mode = RuleMode.parse(obj.get("mode", "delegation"))
    rs = RuleSet(mode=mode)
    for raw in obj["rules"]:
        rs = add_rule(rs, raw, created_at=0.0)
    return rs


def load_ruleset(path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return ruleset_from_obj(json.load(fh))
