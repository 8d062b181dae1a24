"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines;
any failure fails the corresponding criterion.
"""

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from condel.corpus import Comment, Corpus, Label, Prediction, load_corpus, tokenize
from condel.errors import MinRulesError
from condel.index import build_index
from condel.metrics import (
    average_precision,
    bonus_usd,
    evaluate,
    global_explanations,
    rule_precision,
    union_precision,
    word_table,
)
from condel.model import TrainConfig, annotate, pr_curve, rationale_sparsity, train_linear
from condel.rules import Rule, RuleMode, RuleSet, reported_set
from condel.server import ServerConfig, create_app
from condel.session import ActionRecord, Condition
from condel import session as sess

from conftest import F1_PATH, synth_corpus, synth_keywords
import naive_oracle as oracle

TOL = 1e-12


def announce(number: int, text: str) -> None:
    print(f"[acceptance {number}] PASS - {text}")


def rs(keywords, mode=RuleMode.DELEGATION):
    return RuleSet(rules=tuple(Rule(k) for k in keywords), mode=mode)


def test_criterion_01_fixture_exactness():
    started = time.perf_counter()
    corpus = load_corpus(F1_PATH, name="f1")
    index = build_index(corpus)

    delegation = evaluate(corpus, index, rs(["idiot", "fucking"]))
    assert abs(delegation.average_precision - 0.75) <= TOL
    assert abs(delegation.union_precision - 0.5) <= TOL
    assert delegation.coverage == 2
    assert delegation.reward == 0
    assert abs(delegation.model_alone_precision - 2 / 3) <= TOL

    report_all = evaluate(corpus, index, rs(["idiot", "fucking"], RuleMode.REPORT_ALL))
    assert abs(report_all.average_precision - 7 / 12) <= TOL
    assert abs(report_all.union_precision - 0.5) <= TOL
    assert report_all.reward == 0

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(1, f"fixture metrics exact to 1e-12 in {elapsed:.3f}s")


def test_criterion_02_oracle_equivalence():
    started = time.perf_counter()
    checked = 0
    for seed in range(50):
        corpus = synth_corpus(seed, max_comments=200, vocab_size=40)
        index = build_index(corpus)
        keywords = synth_keywords(seed, corpus, max_rules=10)
        for mode in (RuleMode.DELEGATION, RuleMode.REPORT_ALL):
            report = evaluate(corpus, index, rs(keywords, mode))
            want_avg, want_defined = oracle.o_average_precision(
                corpus, keywords, mode.value
            )
            assert report.average_precision == want_avg
            assert report.defined_rule_count == want_defined
            assert report.union_precision == oracle.o_union_precision(
                corpus, keywords, mode.value
            )
            assert report.coverage == len(oracle.o_reported(corpus, keywords, mode.value))
            assert report.reward == oracle.o_reward(corpus, keywords, mode.value)
            assert report.model_alone_precision == oracle.o_model_alone(corpus)
            for row in report.per_rule:
                assert row.precision == oracle.o_rule_precision(
                    corpus, row.keyword, mode.value
                )
                assert row.matched == len(oracle.o_matches(corpus, row.keyword))
            checked += 1
        got = {r.word: r for r in word_table(corpus, index, min_support=3)}
        want = oracle.o_word_table(corpus, 3)
        assert set(got) == set(want)
        for word, row in want.items():
            assert got[word].delegation_precision == row["delegation_precision"]
            assert got[word].report_all_precision == row["report_all_precision"]
            assert got[word].delegation_reward == row["delegation_reward"]
            assert got[word].report_all_reward == row["report_all_reward"]
        assert (
            list(global_explanations(corpus, 15).entries)
            == oracle.o_global_explanations(corpus, 15)
        )
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    announce(2, f"{checked} corpus/mode evaluations equal the naive oracle "
                f"exactly in {elapsed:.1f}s")


def delegation_dominance_corpus() -> Corpus:
    """100 comments contain the designated word: 60 gold-toxic, 40 not.
    The model is right on 95 of them, so delegation precision is 57/59
    vs 0.6 for report_all: strictly better by construction."""
    comments = []
    fillers = ["alpha", "beta", "gamma"]
    for i in range(100):
        toxic = i < 60
        correct = (i % 20) != 0  # wrong on 5 of 100: ids 0,20,40,60,80
        pred_toxic = toxic if correct else not toxic
        prob = 0.9 if pred_toxic else 0.1
        comments.append(
            Comment(
                id=f"m{i}",
                text=f"target {fillers[i % 3]}",
                gold=Label.TOXIC if toxic else Label.NONTOXIC,
                pred=Prediction(
                    label=Label.TOXIC if pred_toxic else Label.NONTOXIC, prob=prob
                ),
            )
        )
    # some non-matching noise
    for i in range(20):
        comments.append(
            Comment(
                id=f"x{i}",
                text="unrelated words here",
                gold=Label.NONTOXIC,
                pred=Prediction(label=Label.NONTOXIC, prob=0.2),
            )
        )
    return Corpus(name="dominance", comments=tuple(comments))


def test_criterion_03_delegation_dominance():
    # (a) subset + denominator discipline on the random suite
    for seed in range(15):
        corpus = synth_corpus(seed)
        index = build_index(corpus)
        pred_toxic = {
            c.id for c in corpus.comments
            if c.pred is not None and c.pred.label is Label.TOXIC
        }
        for keyword in sorted(index.postings):
            singleton_del = reported_set(index, corpus, rs([keyword]))
            singleton_all = reported_set(
                index, corpus, rs([keyword], RuleMode.REPORT_ALL)
            )
            assert singleton_del <= singleton_all
            assert singleton_del <= pred_toxic

    # (b) the constructed corpus gives strictly higher delegation precision
    corpus = delegation_dominance_corpus()
    index = build_index(corpus)
    matches = index.postings["target"]
    assert len(matches) == 100
    toxic_rate = sum(
        1 for cid in matches if corpus[cid].gold is Label.TOXIC
    ) / len(matches)
    correct = sum(
        1 for cid in matches
        if (corpus[cid].pred.label is Label.TOXIC) == (corpus[cid].gold is Label.TOXIC)
    )
    assert correct / len(matches) >= 0.90
    assert toxic_rate <= 0.60

    p_del = rule_precision(corpus, index, "target", RuleMode.DELEGATION)
    p_all = rule_precision(corpus, index, "target", RuleMode.REPORT_ALL)
    assert p_del == 57 / 59
    assert p_all == 0.6
    assert p_del > p_all
    announce(3, f"delegation precision {p_del:.3f} > report_all {p_all:.3f}; "
                "subset and denominator checks hold on the random suite")


def test_criterion_04_metric_identities():
    for seed in range(50):
        corpus = synth_corpus(seed)
        index = build_index(corpus)
        keywords = synth_keywords(seed, corpus)
        for mode in (RuleMode.DELEGATION, RuleMode.REPORT_ALL):
            for keyword in keywords:
                assert union_precision(corpus, index, rs([keyword], mode)) == (
                    rule_precision(corpus, index, keyword, mode)
                )
            report = evaluate(corpus, index, rs(keywords, mode))
            tp, fp = oracle.o_tp_fp(
                corpus, oracle.o_reported(corpus, keywords, mode.value)
            )
            assert report.reward == tp - fp
            assert report.reward == 2 * tp - report.coverage  # N(2p-1) in ints
            backwards, defined = average_precision(
                corpus, index, rs(list(reversed(keywords)), mode)
            )
            if report.average_precision is None:
                assert backwards is None
            else:
                assert abs(backwards - report.average_precision) <= TOL
            assert defined == report.defined_rule_count
    announce(4, "singleton union, integer reward identity, and order "
                "invariance hold across the random suite")


def test_criterion_05_bonus():
    assert bonus_usd(1500, 300) == 1.20
    assert bonus_usd(100, 400) == 0.00
    assert bonus_usd(500000, 0) == 2.00
    announce(5, "bonus examples and both clamps exact")


def test_criterion_06_model():
    from test_model import separable_corpus

    # gradient vs central finite differences on a 10-comment corpus
    from condel.model import build_vocab, loss_and_gradient

    rng = random.Random(23)
    words = [f"v{i}" for i in range(6)]
    comments = tuple(
        Comment(
            id=f"c{i}",
            text=" ".join(rng.choice(words) for _ in range(rng.randint(1, 5))),
            gold=Label.TOXIC if i % 2 else Label.NONTOXIC,
        )
        for i in range(10)
    )
    corpus = Corpus(name="grad10", comments=comments)
    vocab = build_vocab(corpus)
    weights = [rng.gauss(0.0, 0.4) for _ in vocab]
    bias, l1, h = -0.2, 0.005, 1e-5
    _, grad, grad_bias = loss_and_gradient(corpus, vocab, weights, bias, l1)

    def loss_at(ws, b):
        return loss_and_gradient(corpus, vocab, ws, b, l1)[0]

    worst = 0.0
    for j in range(len(weights)):
        up, down = list(weights), list(weights)
        up[j] += h
        down[j] -= h
        fd = (loss_at(up, bias) - loss_at(down, bias)) / (2 * h)
        rel = abs(fd - grad[j]) / max(abs(fd), abs(grad[j]), 1e-12)
        worst = max(worst, rel)
    fd_b = (loss_at(weights, bias + h) - loss_at(weights, bias - h)) / (2 * h)
    worst = max(worst, abs(fd_b - grad_bias) / max(abs(fd_b), abs(grad_bias), 1e-12))
    assert worst <= 1e-4

    # separable corpus trains to accuracy 1.0
    separable = separable_corpus()
    model = train_linear(
        separable, TrainConfig(l1_penalty=1e-4, epochs=400, learning_rate=1.0, seed=3)
    )
    annotated = annotate(model, separable)
    assert all(c.pred.label is c.gold for c in annotated.comments)

    # recall never increases along an ascending threshold sweep
    points = pr_curve(annotated, [i / 20 for i in range(21)])
    recalls = [p.recall for p in points]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))

    # sparsity analogue: predicted-nontoxic retain less than predicted-toxic
    stats = rationale_sparsity(annotated)
    assert stats.nontoxic_mean < stats.toxic_mean
    announce(6, f"gradient max rel err {worst:.2e}; separable accuracy 1.0; "
                f"recall monotone; sparsity {stats.nontoxic_mean:.3f} < "
                f"{stats.toxic_mean:.3f}")


def test_criterion_07_global_explanations():
    corpus = load_corpus(F1_PATH, name="f1")
    expl = global_explanations(corpus, 3)
    assert expl.entries == (("fucking", 2), ("fuck", 1), ("idiot", 1))
    announce(7, "top-3 rationale tokens exact with documented tie-break")


def test_criterion_08_session_replay():
    corpus = load_corpus(F1_PATH, name="f1")

    # scripted and randomized sessions replay to the same ruleset
    for seed in range(10):
        rng = random.Random(seed)
        s = sess.start_session(
            Condition.LABELS, corpus, min_rules=0, session_id=f"r{seed}",
            started_at=0.0,
        )
        t = 0.0
        vocab = ["idiot", "fucking", "fuck", "great", "day", "ref", "corner"]
        for _ in range(rng.randint(3, 25)):
            t += rng.random()
            roll = rng.random()
            if roll < 0.5:
                kw = rng.choice(vocab)
                if kw not in s.ruleset:
                    s = sess.add_rule(s, kw, t)
            elif roll < 0.7 and len(s.ruleset):
                s = sess.remove_rule(s, rng.choice(s.ruleset.keywords()), t)
            else:
                s = sess.log_action(s, ActionRecord("search", rng.choice(vocab), t))
        replayed = sess.replay(Condition.LABELS, corpus, s.actions, min_rules=0)
        assert replayed.ruleset.keywords() == s.ruleset.keywords()

    # nine rules at min_rules=10 is rejected
    s = sess.start_session(
        Condition.LABELS, corpus, min_rules=10, session_id="strict", started_at=0.0
    )
    for i in range(9):
        s = sess.add_rule(s, f"word{i}", float(i + 1))
    with pytest.raises(MinRulesError):
        sess.finish_session(s, 100.0)

    # rules_per_minute = n_rules / elapsed to 1e-9
    s = sess.add_rule(s, "word9", 10.0)
    finished, result = sess.finish_session(s, 444.0)
    expected = result.n_rules / (444.0 / 60.0)
    assert abs(result.rules_per_minute - expected) <= 1e-9
    announce(8, "replay reproduces rulesets; min-rules gate and "
                "rules-per-minute arithmetic verified")


def test_criterion_09_server_contract(tmp_path):
    config = ServerConfig(
        corpora={"f1": str(F1_PATH)}, data_dir=str(tmp_path / "s"), min_rules=2
    )
    app = create_app(config)
    with TestClient(app) as client:
        # example 1: labels-condition search
        sid = client.post(
            "/api/session", json={"condition": "labels", "corpus": "f1"}
        ).json()["session_id"]
        resp = client.get(
            "/api/search",
            params={"session": sid, "q": "idiot", "filter": "toxic", "page": 0},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["total"] == 1
        assert body["items"][0]["id"] == "c1"
        assert body["items"][0]["pred"] == "toxic"

        # example 2: manual-condition responses carry no model fields
        manual = client.post(
            "/api/session", json={"condition": "manual", "corpus": "f1"}
        ).json()
        msid = manual["session_id"]
        banned = ("pred", "rationale", "global")
        payloads = [
            manual,
            client.get("/api/search", params={"session": msid, "q": "idiot"}).json(),
            client.get("/api/random", params={"session": msid, "k": 4, "seed": 5}).json(),
            client.post(
                "/api/rules", params={"session": msid}, json={"keyword": "idiot"}
            ).json(),
            client.get("/api/rules", params={"session": msid}).json(),
        ]

        def keys_of(node):
            if isinstance(node, dict):
                for key, value in node.items():
                    yield key
                    yield from keys_of(value)
            elif isinstance(node, list):
                for item in node:
                    yield from keys_of(item)

        for payload in payloads:
            for key in keys_of(payload):
                assert not any(b in key for b in banned), (key, payload)

        # example 3: multi-token keyword rejected with the exact message
        resp = client.post(
            "/api/rules", params={"session": sid}, json={"keyword": "go away"}
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "multi-token keyword"
    announce(9, "all three endpoint examples pass; manual schema scan clean")
