"""Evaluation math for keyword rulesets on labeled corpora.

Per-rule precision, average precision over a ruleset, precision of the
deduplicated union, coverage, the toxic-minus-nontoxic reward, its
dollar bonus, the model-alone baseline, the per-word oracle table,
global explanations, and cross-distribution comparison.

Undefined precision (a zero denominator) is None, never 0 or 1:
averaging in a fake value would bias the headline metric, so undefined
rules are excluded from the mean and surfaced via defined_rule_count.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .corpus import Corpus, Label, tokenize
from .errors import EvaluationMismatchError, MissingLabelError
from .index import InvertedIndex
from .rules import Rule, RuleMode, RuleSet, reported_set


@dataclass(frozen=True)
class RuleReport:
    keyword: str
    precision: float | None
    matched: int  # comments containing the keyword
    reported: int  # comments this rule alone reports under the mode
    reward: int


@dataclass(frozen=True)
class EvaluationReport:
    corpus_name: str
    mode: RuleMode
    rule_keywords: tuple[str, ...]
    per_rule: tuple[RuleReport, ...]
    average_precision: float | None
    defined_rule_count: int
    union_precision: float | None
    coverage: int
    reward: int
    bonus_usd: float
    model_alone_precision: float | None


@dataclass(frozen=True)
class WordMetricsRow:
    word: str
    support: int
    delegation_precision: float | None
    report_all_precision: float | None
    delegation_reward: int
    report_all_reward: int


@dataclass(frozen=True)
class GlobalExplanation:
    entries: tuple[tuple[str, int], ...]  # (token, occurrences), freq desc


@dataclass(frozen=True)
class DeltaReport:
    """Metric differences (b minus a); None wherever either side is absent."""

    corpus_a: str
    corpus_b: str
    mode: RuleMode
    average_precision: float | None
    union_precision: float | None
    coverage: int
    reward: int
    model_alone_precision: float | None


def _gold(corpus: Corpus, cid: str, strict: bool) -> bool | None:
    """True/False for toxic/nontoxic; None in lenient mode when unlabeled."""
    gold = corpus[cid].gold
    if gold is None:
        if strict:
            raise MissingLabelError(f"comment {cid!r} has no gold label")
        return None
    return gold is Label.TOXIC


def _singleton(rule: Rule | str, mode: RuleMode) -> RuleSet:
    keyword = rule.keyword if isinstance(rule, Rule) else rule
    return RuleSet(rules=(Rule(keyword),), mode=mode)


def _precision_over(corpus: Corpus, ids, strict: bool) -> float | None:
    toxic = 0
    denom = 0
    for cid in ids:
        g = _gold(corpus, cid, strict)
        if g is None:
            continue
        denom += 1
        toxic += g
    return toxic / denom if denom else None


def rule_precision(
    corpus: Corpus,
    index: InvertedIndex,
    rule: Rule | str,
    mode: RuleMode,
    strict: bool = True,
) -> float | None:
    """Fraction of the rule's reported comments that are gold-toxic.

    Under delegation the denominator is the predicted-toxic matches;
    under report_all it is all matches.  None when the denominator is
    empty.
    """
    ids = reported_set(index, corpus, _singleton(rule, mode), strict=strict)
    return _precision_over(corpus, ids, strict)


def average_precision(
    corpus: Corpus,
    index: InvertedIndex,
    ruleset: RuleSet,
    strict: bool = True,
) -> tuple[float | None, int]:
    """Mean of the defined per-rule precisions, plus how many were defined.

    Rules with an empty denominator are excluded from the mean rather
    than counted as 0 or 1.
    """
    values = []
    for rule in ruleset.rules:
        p = rule_precision(corpus, index, rule, ruleset.mode, strict=strict)
        if p is not None:
            values.append(p)
    if not values:
        return None, 0
    return sum(values) / len(values), len(values)


def union_precision(
    corpus: Corpus,
    index: InvertedIndex,
    ruleset: RuleSet,
    strict: bool = True,
) -> float | None:
    ids = reported_set(index, corpus, ruleset, strict=strict)
    return _precision_over(corpus, ids, strict)


def _tp_fp(corpus: Corpus, ids, strict: bool) -> tuple[int, int]:
    tp = 0
    fp = 0
    for cid in ids:
        g = _gold(corpus, cid, strict)
        if g is None:
            continue
        if g:
            tp += 1
        else:
            fp += 1
    return tp, fp


def reward(
    corpus: Corpus,
    index: InvertedIndex,
    ruleset: RuleSet,
    strict: bool = True,
) -> int:
    """Reported toxic count minus reported nontoxic count."""
    tp, fp = _tp_fp(corpus, reported_set(index, corpus, ruleset, strict=strict), strict)
    return tp - fp


def bonus_usd(tp: int, fp: int) -> float:
    """Dollar bonus: $0.10 per 100 correctly reported toxic comments,
    minus $0.10 per 100 mistaken ones, clamped to [$0, $2].

    Prorated linearly (0.001 per comment) and rounded to the cent
    half-up, in decimal arithmetic so .005 boundaries round upward.
    """
    if tp < 0 or fp < 0:
        raise ValueError("tp and fp must be >= 0")
    raw = Decimal(tp - fp) * Decimal("0.001")
    clamped = min(max(raw, Decimal("0")), Decimal("2"))
    return float(clamped.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def model_alone_precision(corpus: Corpus, strict: bool = True) -> float | None:
    """Precision of the classifier's predicted-toxic set over the corpus."""
    ids = [
        c.id
        for c in corpus.comments
        if c.pred is not None and c.pred.label is Label.TOXIC
    ]
    return _precision_over(corpus, ids, strict)


def evaluate(
    corpus: Corpus,
    index: InvertedIndex,
    ruleset: RuleSet,
    strict: bool = True,
    model_baseline: bool = True,
) -> EvaluationReport:
    """Full report for one ruleset on one corpus."""
    per_rule = []
    for rule in ruleset.rules:
        ids = reported_set(index, corpus, _singleton(rule, ruleset.mode), strict=strict)
        tp, fp = _tp_fp(corpus, ids, strict)
        per_rule.append(
            RuleReport(
                keyword=rule.keyword,
                precision=_precision_over(corpus, ids, strict),
                matched=len(index.ids_for(rule.keyword)),
                reported=len(ids),
                reward=tp - fp,
            )
        )
    values = [r.precision for r in per_rule if r.precision is not None]
    union_ids = reported_set(index, corpus, ruleset, strict=strict)
    tp, fp = _tp_fp(corpus, union_ids, strict)
    return EvaluationReport(
        corpus_name=corpus.name,
        mode=ruleset.mode,
        rule_keywords=tuple(ruleset.keywords()),
        per_rule=tuple(per_rule),
        average_precision=sum(values) / len(values) if values else None,
        defined_rule_count=len(values),
        union_precision=_precision_over(corpus, union_ids, strict),
        coverage=len(union_ids),
        reward=tp - fp,
        bonus_usd=bonus_usd(tp, fp),
        model_alone_precision=(
            model_alone_precision(corpus, strict=strict) if model_baseline else None
        ),
    )


_WORD_COLUMNS = (
    "word",
    "support",
    "delegation_precision",
    "report_all_precision",
    "delegation_reward",
    "report_all_reward",
)


def word_table(
    corpus: Corpus,
    index: InvertedIndex,
    min_support: int = 100,
    sort_by: str = "word",
    descending: bool = False,
    strict: bool = True,
) -> list[WordMetricsRow]:
    """Single-rule metrics for every token appearing in enough comments.

    min_support defaults to the analysis cutoff of 100 comments; desk
    fixtures pass a smaller value.  Rows sort by any column; absent
    precisions sort after defined ones.
    """
    if sort_by not in _WORD_COLUMNS:
        raise ValueError(f"unknown column {sort_by!r}")
    rows = []
    for word, ids in index.postings.items():
        if len(ids) < min_support:
            continue
        del_ids = reported_set(index, corpus, _singleton(word, RuleMode.DELEGATION), strict=strict)
        all_ids = ids
        del_tp, del_fp = _tp_fp(corpus, del_ids, strict)
        all_tp, all_fp = _tp_fp(corpus, all_ids, strict)
        rows.append(
            WordMetricsRow(
                word=word,
                support=len(ids),
                delegation_precision=_precision_over(corpus, del_ids, strict),
                report_all_precision=_precision_over(corpus, all_ids, strict),
                delegation_reward=del_tp - del_fp,
                report_all_reward=all_tp - all_fp,
            )
        )

    if sort_by == "word":
        rows.sort(key=lambda r: r.word, reverse=descending)
        return rows

    def key(row: WordMetricsRow):
        value = getattr(row, sort_by)
        absent = value is None
        if absent:
            value = 0
        # Absent sorts last either way; ties break by word ascending.
        return (absent, -value if descending else value, row.word)

    rows.sort(key=key)
    return rows


def global_explanations(corpus: Corpus, k: int) -> GlobalExplanation:
    """Most frequent rationale tokens across the corpus.

    Counts token occurrences (not distinct comments) by tokenizing each
    rationale span's substring; top k by frequency, ties broken by token
    ascending.  Comments without predictions contribute nothing.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    counts: dict[str, int] = {}
    for c in corpus.comments:
        if c.pred is None:
            continue
        for span in c.pred.rationale:
            for token, _ in tokenize(c.text[span.start:span.end]):
                counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return GlobalExplanation(entries=tuple(ranked[:k]))


def compare_distributions(
    report_a: EvaluationReport, report_b: EvaluationReport
) -> DeltaReport:
    """Per-metric differences (b minus a) for one ruleset on two corpora."""
    if report_a.mode is not report_b.mode:
        raise EvaluationMismatchError(
            f"mode mismatch: {report_a.mode.value} vs {report_b.mode.value}"
        )
    if set(report_a.rule_keywords) != set(report_b.rule_keywords):
        raise EvaluationMismatchError("ruleset mismatch")

    def delta(a, b):
        if a is None or b is None:
            return None
        return b - a

    return DeltaReport(
        corpus_a=report_a.corpus_name,
        corpus_b=report_b.corpus_name,
        mode=report_a.mode,
        average_precision=delta(report_a.average_precision, report_b.average_precision),
        union_precision=delta(report_a.union_precision, report_b.union_precision),
        coverage=report_b.coverage - report_a.coverage,
        reward=report_b.reward - report_a.reward,
        model_alone_precision=delta(
            report_a.model_alone_precision, report_b.model_alone_precision
        ),
    )


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "corpus": report.corpus_name,
        "mode": report.mode.value,
        "rules": list(report.rule_keywords),
        "per_rule": [
            {
                "keyword": r.keyword,
                "precision": r.precision,
                "matched": r.matched,
                "reported": r.reported,
                "reward": r.reward,
            }
            for r in report.per_rule
        ],
        "average_precision": report.average_precision,
        "defined_rule_count": report.defined_rule_count,
        "union_precision": report.union_precision,
        "coverage": report.coverage,
        "reward": report.reward,
        "bonus_usd": report.bonus_usd,
        "model_alone_precision": report.model_alone_precision,
    }


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2)


def delta_to_dict(delta: DeltaReport) -> dict:
    return {
        "corpus_a": delta.corpus_a,
        "corpus_b": delta.corpus_b,
        "mode": delta.mode.value,
        "average_precision": delta.average_precision,
        "union_precision": delta.union_precision,
        "coverage": delta.coverage,
        "reward": delta.reward,
        "model_alone_precision": delta.model_alone_precision,
    }


def word_table_to_csv(rows) -> str:
    """CSV export; absent precisions serialize as empty cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_WORD_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.word,
                row.support,
                "" if row.delegation_precision is None else repr(row.delegation_precision),
                "" if row.report_all_precision is None else repr(row.report_all_precision),
                row.delegation_reward,
                row.report_all_reward,
            ]
        )
    return buf.getvalue()
