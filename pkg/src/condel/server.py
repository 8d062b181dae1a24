"""HTTP service exposing search, rules, metrics, and session lifecycle.

All endpoints live under /api and speak JSON; errors use the body shape
{"error": str, "field"?: str}.  Sessions are addressed by unguessable
ids passed as the ``session`` query parameter.

Two gating invariants are enforced here, not in the UI:

* gold labels never appear in any session-facing response; only the
  evaluation path reads them, and only at finish (or behind an operator
  flag);
* manual-condition responses carry no prediction, rationale, or
  global-explanation fields, and prediction filters are rejected for
  manual sessions.

Interactive browsing GETs (search, random) log exactly one read-kind
action each; state mirrors like GET /api/rules log nothing, so the
action log counts gestures, not refreshes.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import metrics, rules, session as sess
from .corpus import Comment, Corpus, Label, load_corpus
from .errors import (
    CondelError,
    DuplicateRuleError,
    KeywordError,
    MinRulesError,
    MissingPredictionError,
    MissingRuleError,
    SessionError,
)
from .index import InvertedIndex, PredFilter, build_index, random_sample, search
from .model import import_predictions, load_model, annotate
from .session import ActionRecord, Condition, Session, SessionStore


@dataclass
class ServerConfig:
    corpora: dict[str, str]
    data_dir: str = "sessions"
    host: str = "127.0.0.1"
    port: int = 8008
    model: str | None = None
    predictions: str | None = None
    default_condition: str = "labels"
    page_size: int = 10
    min_rules: int = 10
    cors: list[str] = field(default_factory=list)
    evaluate_on_finish: bool = True
    allow_live_evaluate: bool = False
    global_k: int = 15
    ui_dir: str | None = None

    @classmethod
    def load(cls, path) -> "ServerConfig":
        obj = json.loads(Path(path).read_text())
        corpora = obj.get("corpora") or obj.get("corpus_paths")
        if corpora is None:
            raise CondelError("config must name at least one corpus")
        if isinstance(corpora, list):
            corpora = {Path(p).stem: p for p in corpora}
        known = {f.name for f in cls.__dataclass_fields__.values()}
        kwargs = {k: v for k, v in obj.items() if k in known and k != "corpora"}
        return cls(corpora=corpora, **kwargs)


class ApiError(Exception):
    def __init__(self, status: int, message: str, fieldname: str | None = None):
        self.status = status
        self.message = message
        self.fieldname = fieldname


class SessionBody(BaseModel):
    condition: str | None = None
    corpus: str | None = None
    min_rules: int | None = None


class RuleBody(BaseModel):
    keyword: str


class ActionBody(BaseModel):
    kind: str
    payload: str = ""


# UI-only gestures accepted on POST /api/actions; everything else must
# arrive through its own endpoint so the log mirrors real state changes.
_UI_GESTURES = frozenset(
    {"clear_search", "view_instructions", "start_tutorial", "click_global_token"}
)


def _card(comment: Comment, condition: Condition) -> dict:
    """Comment payload with condition-gated fields; never the gold label."""
    card: dict = {"id": comment.id, "text": comment.text}
    if condition.shows_predictions and comment.pred is not None:
        card["pred"] = comment.pred.label.value
        # Rationales are surfaced for predicted-toxic comments only.
        if condition.shows_rationales and comment.pred.label is Label.TOXIC:
            card["rationale"] = [[s.start, s.end] for s in comment.pred.rationale]
    return card


def load_corpora(config: ServerConfig) -> dict[str, tuple[Corpus, InvertedIndex]]:
    model = load_model(config.model) if config.model else None
    out = {}
    for name, path in config.corpora.items():
        corpus = load_corpus(path, name=name)
        if model is not None:
            corpus = annotate(model, corpus)
        elif config.predictions:
            corpus = import_predictions(corpus, config.predictions)
        out[name] = (corpus, build_index(corpus))
    return out


def create_app(
    config: ServerConfig,
    corpora: dict[str, tuple[Corpus, InvertedIndex]] | None = None,
    clock=time.time,
) -> FastAPI:
    if corpora is None:
        corpora = load_corpora(config)
    if not corpora:
        raise CondelError("at least one corpus is required")

    app = FastAPI(title="condel", version="0.1.0")
    if config.cors:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    store = SessionStore(config.data_dir)
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    app.state.store = store
    app.state.corpora = corpora

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        body = {"error": exc.message}
        if exc.fieldname:
            body["field"] = exc.fieldname
        return JSONResponse(body, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = first.get("loc") or ("body",)
        body = {"error": first.get("msg", "invalid request"), "field": str(loc[-1])}
        return JSONResponse(body, status_code=422)

    def fail(exc: Exception, fieldname: str | None = None) -> ApiError:
        status = 422
        if isinstance(exc, DuplicateRuleError):
            status = 409
        elif isinstance(exc, MissingRuleError):
            status = 404
        elif isinstance(exc, MinRulesError):
            status = 400
        elif isinstance(exc, SessionError):
            status = 409
        return ApiError(status, str(exc), fieldname)

    def get_corpus(name: str) -> tuple[Corpus, InvertedIndex]:
        try:
            return corpora[name]
        except KeyError:
            raise ApiError(404, f"unknown corpus {name!r}", "corpus") from None

    def get_session(session_id: str | None) -> Session:
        if not session_id or session_id not in sessions:
            raise ApiError(404, "unknown session", "session")
        return sessions[session_id]

    def record_and_store(updated: Session) -> None:
        sessions[updated.id] = updated
        store.append(updated.id, updated.actions[-1])

    @app.get("/api/health")
    def health():
        from ._native import IMPL

        return {"status": "ok", "corpora": sorted(corpora), "kernel": IMPL}

    @app.post("/api/session")
    def create_session(body: SessionBody):
        condition_raw = body.condition or config.default_condition
        try:
            condition = Condition.parse(condition_raw)
        except SessionError as e:
            raise ApiError(422, str(e), "condition") from None
        corpus_name = body.corpus or next(iter(corpora))
        corpus, _ = get_corpus(corpus_name)
        min_rules = config.min_rules if body.min_rules is None else body.min_rules
        session_id = uuid.uuid4().hex
        try:
            session = sess.start_session(
                condition,
                corpus,
                min_rules,
                session_id=session_id,
                started_at=clock(),
            )
        except MissingPredictionError as e:
            raise fail(e, "corpus") from None
        sessions[session_id] = session
        store.create(session)
        payload = {
            "session_id": session_id,
            "condition": condition.value,
            "corpus": corpus_name,
            "mode": condition.mode.value,
            "min_rules": min_rules,
            "page_size": config.page_size,
        }
        if condition.shows_global_explanations:
            expl = metrics.global_explanations(corpus, config.global_k)
            payload["global_explanations"] = [
                {"token": token, "frequency": freq} for token, freq in expl.entries
            ]
        return payload

    @app.get("/api/search")
    def search_comments(
        session: str | None = None,
        q: str = "",
        filter: str = "all",
        page: int = 0,
        page_size: int | None = None,
        source: str | None = None,
    ):
        state = get_session(session)
        corpus, index = get_corpus(state.corpus_name)
        try:
            keyword = rules.normalize_keyword(q)
        except KeywordError as e:
            raise fail(e, "q") from None
        try:
            pred_filter = PredFilter.parse(filter)
        except KeywordError as e:
            raise fail(e, "filter") from None
        if pred_filter is not PredFilter.ALL and not state.condition.shows_predictions:
            raise ApiError(422, "prediction filters unavailable in manual condition", "filter")
        if source == "chip" and not state.condition.shows_global_explanations:
            raise ApiError(422, "global explanations unavailable in this condition", "source")

        size = config.page_size if page_size is None else page_size
        try:
            result = search(index, keyword, pred_filter, page, size)
        except ValueError as e:
            raise ApiError(422, str(e)) from None

        if page > 0:
            kind, payload = "get_page", f"{keyword} page={page}"
        elif source == "chip":
            kind, payload = "click_global_token", keyword
        elif pred_filter is PredFilter.TOXIC_ONLY:
            kind, payload = "filter_toxic", keyword
        elif pred_filter is PredFilter.NONTOXIC_ONLY:
            kind, payload = "filter_nontoxic", keyword
        else:
            kind, payload = "search", keyword
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated = sess.log_action(state, ActionRecord(kind, payload, clock()))
            except SessionError as e:
                raise fail(e) from None
            record_and_store(updated)

        return {
            "total": result.total,
            "page": result.page_index,
            "page_size": result.page_size,
            "items": [_card(corpus[cid], state.condition) for cid in result.items],
        }

    @app.get("/api/random")
    def random_comments(session: str | None = None, k: int = 10, seed: int | None = None):
        state = get_session(session)
        corpus, _ = get_corpus(state.corpus_name)
        if k < 0:
            raise ApiError(422, "k must be >= 0", "k")
        if seed is None:
            seed = uuid.uuid4().int & 0x7FFFFFFF
        ids = random_sample(corpus, k, seed)
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated = sess.log_action(
                    state, ActionRecord("load_random", f"k={k} seed={seed}", clock())
                )
            except SessionError as e:
                raise fail(e) from None
            record_and_store(updated)
        return {
            "total": len(ids),
            "seed": seed,
            "items": [_card(corpus[cid], state.condition) for cid in ids],
        }

    def _rule_row(state: Session, corpus, index, keyword: str) -> dict:
        stats = rules.rule_stats(index, corpus, keyword)
        row = {"keyword": keyword, "total_matched": stats.total_matched}
        if state.condition.shows_predictions:
            row["predicted_toxic_matched"] = stats.predicted_toxic_matched
        return row

    @app.get("/api/rules")
    def list_rules(session: str | None = None):
        state = get_session(session)
        corpus, index = get_corpus(state.corpus_name)
        return {
            "mode": state.ruleset.mode.value,
            "min_rules": state.min_rules,
            "rules": [
                _rule_row(state, corpus, index, kw) for kw in state.ruleset.keywords()
            ],
        }

    @app.post("/api/rules")
    def add_rule(body: RuleBody, session: str | None = None):
        state = get_session(session)
        corpus, index = get_corpus(state.corpus_name)
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated = sess.add_rule(state, body.keyword, clock())
            except (KeywordError, DuplicateRuleError, SessionError) as e:
                raise fail(e, "keyword") from None
            record_and_store(updated)
        keyword = updated.ruleset.rules[-1].keyword
        return {
            "rule": _rule_row(updated, corpus, index, keyword),
            "n_rules": len(updated.ruleset),
        }

    @app.delete("/api/rules/{keyword}")
    def delete_rule(keyword: str, session: str | None = None):
        state = get_session(session)
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated = sess.remove_rule(state, keyword, clock())
            except (KeywordError, MissingRuleError, SessionError) as e:
                raise fail(e, "keyword") from None
            record_and_store(updated)
        return {"removed": updated.actions[-1].payload, "n_rules": len(updated.ruleset)}

    @app.post("/api/actions")
    def log_ui_action(body: ActionBody, session: str | None = None):
        state = get_session(session)
        if body.kind not in _UI_GESTURES:
            raise ApiError(422, f"kind {body.kind!r} not loggable here", "kind")
        if body.kind == "click_global_token" and not state.condition.shows_global_explanations:
            raise ApiError(422, "global explanations unavailable in this condition", "kind")
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated = sess.log_action(state, ActionRecord(body.kind, body.payload, clock()))
            except SessionError as e:
                raise fail(e) from None
            record_and_store(updated)
        return {"logged": body.kind}

    def _evaluation(state: Session):
        corpus, index = get_corpus(state.corpus_name)
        if any(c.gold is None for c in corpus.comments):
            return None
        report = metrics.evaluate(
            corpus,
            index,
            state.ruleset,
            model_baseline=state.condition.shows_predictions,
        )
        return metrics.report_to_dict(report)

    @app.post("/api/finish")
    def finish(session: str | None = None):
        state = get_session(session)
        with store.lock(state.id):
            state = get_session(session)
            try:
                updated, result = sess.finish_session(state, clock())
            except (MinRulesError, SessionError) as e:
                raise fail(e) from None
            record_and_store(updated)
            store.write_result(result)
        body = {"result": result.to_dict(), "report": None, "bonus_usd": None}
        if config.evaluate_on_finish:
            report = _evaluation(updated)
            if report is not None:
                body["report"] = report
                body["bonus_usd"] = report["bonus_usd"]
        return body

    @app.get("/api/evaluate")
    def evaluate_now(session: str | None = None):
        if not config.allow_live_evaluate:
            raise ApiError(403, "live evaluation is disabled")
        state = get_session(session)
        report = _evaluation(state)
        if report is None:
            raise ApiError(422, "corpus has no gold labels to evaluate against")
        return {"report": report, "bonus_usd": report["bonus_usd"]}

    if config.ui_dir and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServerConfig) -> None:
    """Run the service until interrupted; exits nonzero on load failure."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
