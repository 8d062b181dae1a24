"""condel: a conditional-delegation workbench for content moderation.

Humans define keyword rules that delimit trustworthy regions of a
toxicity classifier; the package evaluates those rules (precision,
coverage, reward) against labeled corpora and serves the interactive
rule-building workflow over HTTP.
"""

from ._native import IMPL as kernel_impl
from .corpus import Comment, Corpus, Label, Prediction, TokenSpan, contains, load_corpus, tokenize
from .index import InvertedIndex, PredFilter, SearchPage, build_index, random_sample, search
from .metrics import EvaluationReport, GlobalExplanation, WordMetricsRow, evaluate
from .model import LinearRationaleModel, TrainConfig, annotate, train_linear
from .rules import Rule, RuleMode, RuleSet, RuleStats, normalize_keyword
from .session import ActionRecord, Condition, Session, SessionResult

__version__ = "0.1.0"

__all__ = [
    "ActionRecord",
    "Comment",
    "Condition",
    "Corpus",
    "EvaluationReport",
    "GlobalExplanation",
    "InvertedIndex",
    "Label",
    "LinearRationaleModel",
    "PredFilter",
    "Prediction",
    "Rule",
    "RuleMode",
    "RuleSet",
    "RuleStats",
    "SearchPage",
    "Session",
    "SessionResult",
    "TokenSpan",
    "TrainConfig",
    "WordMetricsRow",
    "annotate",
    "build_index",
    "contains",
    "evaluate",
    "kernel_impl",
    "load_corpus",
    "normalize_keyword",
    "random_sample",
    "search",
    "tokenize",
    "train_linear",
]
