"""One interactive rule-building run: condition, action log, results.

Sessions are immutable values; every operation returns an updated copy,
which makes replay trivial: re-applying a logged action sequence to a
fresh session reproduces the final ruleset.  Persistence is an
append-only JSONL event file per session id plus a final result JSON
document, both named by the session id.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from . import rules
from .corpus import Corpus
from .errors import MinRulesError, MissingPredictionError, SessionError
from .rules import RuleMode, RuleSet


class Condition(enum.Enum):
    """Which assistance the rule builder sees.

    manual exposes no model information at all and builds report_all
    rules; the other three build delegation rules with increasing
    explanation support.
    """

    MANUAL = "manual"
    LABELS = "labels"
    LABELS_LOCAL = "labels_local"
    LABELS_LOCAL_GLOBAL = "labels_local_global"

    @classmethod
    def parse(cls, raw: str) -> "Condition":
        try:
            return cls(raw)
        except ValueError:
            raise SessionError(f"unknown condition {raw!r}") from None

    @property
    def mode(self) -> RuleMode:
        return RuleMode.REPORT_ALL if self is Condition.MANUAL else RuleMode.DELEGATION

    @property
    def shows_predictions(self) -> bool:
        return self is not Condition.MANUAL

    @property
    def shows_rationales(self) -> bool:
        return self in (Condition.LABELS_LOCAL, Condition.LABELS_LOCAL_GLOBAL)

    @property
    def shows_global_explanations(self) -> bool:
        return self is Condition.LABELS_LOCAL_GLOBAL


# The 13 logged action kinds.  Storage treats kind as an open string so
# future kinds survive a round trip; this set is what the tool emits.
ACTION_KINDS = frozenset(
    {
        "search",
        "clear_search",
        "filter_toxic",
        "filter_nontoxic",
        "filter_all",
        "load_random",
        "get_page",
        "add_rule",
        "remove_rule",
        "click_global_token",
        "view_instructions",
        "start_tutorial",
        "finish",
    }
)

READ_KINDS = frozenset(
    {"search", "get_page", "load_random", "filter_toxic", "filter_nontoxic",
     "filter_all", "click_global_token"}
)


@dataclass(frozen=True)
class ActionRecord:
    kind: str
    payload: str = ""
    at: float = 0.0


@dataclass(frozen=True)
class Session:
    id: str
    condition: Condition
    corpus_name: str
    ruleset: RuleSet
    actions: tuple[ActionRecord, ...] = ()
    started_at: float = 0.0
    finished_at: float | None = None
    min_rules: int = 10

    @property
    def finished(self) -> bool:
        return self.finished_at is not None

    def last_at(self) -> float:
        return self.actions[-1].at if self.actions else self.started_at


@dataclass(frozen=True)
class SessionResult:
    session_id: str
    condition: Condition
    corpus_name: str
    n_actions: int
    n_rules: int
    elapsed_minutes: float
    rules_per_minute: float | None  # absent when elapsed time is zero

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "condition": self.condition.value,
            "corpus": self.corpus_name,
            "n_actions": self.n_actions,
            "n_rules": self.n_rules,
            "elapsed_minutes": self.elapsed_minutes,
            "rules_per_minute": self.rules_per_minute,
        }


def start_session(
    condition: Condition,
    corpus: Corpus,
    min_rules: int = 10,
    *,
    session_id: str,
    started_at: float,
) -> Session:
    """Open a run against a loaded corpus.

    Non-manual conditions require the corpus to be fully annotated with
    predictions; the manual condition accepts any corpus (predictions,
    if present, are simply never shown).
    """
    if condition is not Condition.MANUAL:
        for c in corpus.comments:
            if c.pred is None:
                raise MissingPredictionError(
                    f"condition {condition.value} requires predictions; "
                    f"comment {c.id!r} has none"
                )
    return Session(
        id=session_id,
        condition=condition,
        corpus_name=corpus.name,
        ruleset=RuleSet(mode=condition.mode),
        started_at=started_at,
        min_rules=min_rules,
    )


def log_action(session: Session, record: ActionRecord) -> Session:
    if session.finished:
        raise SessionError("session already finished")
    if record.at < session.last_at():
        raise SessionError(
            f"action timestamp {record.at} precedes {session.last_at()}"
        )
    return replace(session, actions=session.actions + (record,))


def add_rule(session: Session, raw: str, at: float) -> Session:
    """Add a rule and log the action in one step, so the log always
    mirrors an actual ruleset change."""
    ruleset = rules.add_rule(session.ruleset, raw, created_at=at)
    session = replace(session, ruleset=ruleset)
    return log_action(session, ActionRecord("add_rule", ruleset.rules[-1].keyword, at))


def remove_rule(session: Session, raw: str, at: float) -> Session:
    keyword = rules.normalize_keyword(raw)
    ruleset = rules.remove_rule(session.ruleset, keyword)
    session = replace(session, ruleset=ruleset)
    return log_action(session, ActionRecord("remove_rule", keyword, at))


def finish_session(session: Session, at: float) -> tuple[Session, SessionResult]:
    """Close the run, logging the final action and computing efficiency.

    Elapsed time runs from session start to the finish click, in
    minutes; rules per minute is rules added divided by that, absent
    when the elapsed time is zero.
    """
    n_rules = len(session.ruleset)
    if n_rules < session.min_rules:
        raise MinRulesError(
            f"at least {session.min_rules} rules required, have {n_rules}"
        )
    session = log_action(session, ActionRecord("finish", "", at))
    session = replace(session, finished_at=at)
    elapsed_minutes = (at - session.started_at) / 60.0
    result = SessionResult(
        session_id=session.id,
        condition=session.condition,
        corpus_name=session.corpus_name,
        n_actions=len(session.actions),
        n_rules=n_rules,
        elapsed_minutes=elapsed_minutes,
        rules_per_minute=(n_rules / elapsed_minutes) if elapsed_minutes > 0 else None,
    )
    return session, result


def replay(
    condition: Condition,
    corpus: Corpus,
    actions,
    min_rules: int = 10,
    session_id: str = "replay",
) -> Session:
    """Re-execute a logged action sequence against the same corpus.

    Read actions are logged as-is; add_rule/remove_rule re-apply their
    payload, so the resulting session carries the same final ruleset.
    """
    records = list(actions)
    started_at = records[0].at if records else 0.0
    session = start_session(
        condition, corpus, min_rules, session_id=session_id, started_at=started_at
    )
    for record in records:
        if record.kind == "add_rule":
            session = add_rule(session, record.payload, record.at)
        elif record.kind == "remove_rule":
            session = remove_rule(session, record.payload, record.at)
        elif record.kind == "finish":
            session, _ = finish_session(session, record.at)
        else:
            session = log_action(session, record)
    return session


class SessionStore:
    """Append-only persistence under one data directory.

    <id>.jsonl holds a header line followed by one line per action;
    <id>.result.json holds the final SessionResult.  Writes for one
    session id are serialized by a per-id lock.
    """

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _events_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _result_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.result.json"

    def create(self, session: Session) -> None:
        header = {
            "session_id": session.id,
            "condition": session.condition.value,
            "corpus": session.corpus_name,
            "min_rules": session.min_rules,
            "started_at": session.started_at,
        }
        with self._events_path(session.id).open("x", encoding="utf-8") as fh:
            fh.write(json.dumps(header) + "\n")

    def append(self, session_id: str, record: ActionRecord) -> None:
        line = json.dumps(
            {"kind": record.kind, "payload": record.payload, "at": record.at}
        )
        with self._events_path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def write_result(self, result: SessionResult) -> None:
        path = self._result_path(result.session_id)
        path.write_text(json.dumps(result.to_dict(), indent=2) + "\n")

    def load_events(self, session_id: str) -> tuple[dict, list[ActionRecord]]:
        """Header dict plus the logged actions, unknown kinds preserved."""
        path = self._events_path(session_id)
        with path.open(encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        if not lines:
            raise SessionError(f"empty event file for {session_id}")
        header, *events = lines
        records = [
            ActionRecord(
                kind=str(e["kind"]), payload=str(e.get("payload", "")), at=float(e["at"])
            )
            for e in events
        ]
        return header, records
