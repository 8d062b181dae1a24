import itertools
import json

import pytest
from fastapi.testclient import TestClient

from condel.index import build_index
from condel.server import ServerConfig, create_app

from conftest import F1_PATH


@pytest.fixture()
def client(tmp_path):
    config = ServerConfig(
        corpora={"f1": str(F1_PATH)},
        data_dir=str(tmp_path / "sessions"),
        min_rules=2,
        page_size=10,
    )
    counter = itertools.count()
    clock = lambda: 1000.0 + next(counter)  # noqa: E731
    app = create_app(config, clock=clock)
    with TestClient(app) as tc:
        tc.data_dir = tmp_path / "sessions"
        yield tc


def open_session(client, condition="labels", **kwargs):
    body = {"condition": condition, "corpus": "f1", **kwargs}
    resp = client.post("/api/session", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


def scan_keys(payload, banned=("pred", "rationale", "global")):
    found = []

    def walk(node, path):
        if isinstance(node, dict):
            for key, value in node.items():
                if any(b in key for b in banned):
                    found.append(f"{path}.{key}")
                walk(value, f"{path}.{key}")
        elif isinstance(node, list):
            for i, item in enumerate(node):
                walk(item, f"{path}[{i}]")

    walk(payload, "$")
    return found


def test_health(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"
    assert resp.json()["corpora"] == ["f1"]


def test_search_labels_condition(client):
    sid = open_session(client)["session_id"]
    resp = client.get(
        "/api/search", params={"session": sid, "q": "idiot", "filter": "toxic", "page": 0}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == 1
    assert len(body["items"]) == 1
    item = body["items"][0]
    assert item["id"] == "c1"
    assert item["text"] == "you are a fucking idiot"
    assert item["pred"] == "toxic"
    assert "rationale" not in item  # labels condition shows no highlights
    assert "gold" not in item


def test_search_manual_condition_carries_no_model_fields(client):
    sid = open_session(client, "manual")["session_id"]
    resp = client.get("/api/search", params={"session": sid, "q": "idiot"})
    assert resp.status_code == 200
    assert resp.json()["total"] == 3
    assert scan_keys(resp.json()) == []


def test_manual_rejects_prediction_filter(client):
    sid = open_session(client, "manual")["session_id"]
    resp = client.get(
        "/api/search", params={"session": sid, "q": "idiot", "filter": "toxic"}
    )
    assert resp.status_code == 422


def test_multi_token_rule_rejected(client):
    sid = open_session(client)["session_id"]
    resp = client.post(
        "/api/rules", params={"session": sid}, json={"keyword": "go away"}
    )
    assert resp.status_code == 422
    assert resp.json()["error"] == "multi-token keyword"


def test_rationale_shown_under_labels_local(client):
    sid = open_session(client, "labels_local")["session_id"]
    resp = client.get("/api/search", params={"session": sid, "q": "fucking"})
    items = {item["id"]: item for item in resp.json()["items"]}
    assert items["c1"]["rationale"] == [[10, 17], [18, 23]]
    assert items["c2"]["rationale"] == [[9, 16]]
    # predicted-nontoxic cards carry no highlight ranges
    resp = client.get("/api/search", params={"session": sid, "q": "ref"})
    (c5,) = resp.json()["items"]
    assert c5["pred"] == "nontoxic"
    assert "rationale" not in c5


def test_global_explanations_only_in_full_condition(client):
    full = open_session(client, "labels_local_global")
    assert full["global_explanations"][0] == {"token": "fucking", "frequency": 2}
    for condition in ("manual", "labels", "labels_local"):
        body = open_session(client, condition)
        assert "global_explanations" not in body


def test_rule_flow_and_stats(client):
    sid = open_session(client)["session_id"]
    resp = client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    assert resp.status_code == 200
    rule = resp.json()["rule"]
    assert rule == {"keyword": "idiot", "total_matched": 3, "predicted_toxic_matched": 1}

    dup = client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    assert dup.status_code == 409
    assert dup.json()["error"] == "duplicate rule"

    listing = client.get("/api/rules", params={"session": sid})
    assert [r["keyword"] for r in listing.json()["rules"]] == ["idiot"]

    gone = client.delete(f"/api/rules/idiot", params={"session": sid})
    assert gone.status_code == 200
    assert gone.json()["n_rules"] == 0

    missing = client.delete("/api/rules/zebra", params={"session": sid})
    assert missing.status_code == 404


def test_manual_rule_stats_hide_prediction_counts(client):
    sid = open_session(client, "manual")["session_id"]
    resp = client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    assert resp.json()["rule"] == {"keyword": "idiot", "total_matched": 3}
    listing = client.get("/api/rules", params={"session": sid})
    assert scan_keys(listing.json()) == []


def test_random_deterministic_given_seed(client):
    sid = open_session(client)["session_id"]
    a = client.get("/api/random", params={"session": sid, "k": 3, "seed": 7}).json()
    b = client.get("/api/random", params={"session": sid, "k": 3, "seed": 7}).json()
    assert [i["id"] for i in a["items"]] == [i["id"] for i in b["items"]]
    assert a["seed"] == 7


def test_pagination_and_get_page_action(client):
    sid = open_session(client)["session_id"]
    page0 = client.get(
        "/api/search", params={"session": sid, "q": "idiot", "page": 0, "page_size": 2}
    ).json()
    page1 = client.get(
        "/api/search", params={"session": sid, "q": "idiot", "page": 1, "page_size": 2}
    ).json()
    assert [i["id"] for i in page0["items"]] == ["c1", "c5"]
    assert [i["id"] for i in page1["items"]] == ["c6"]
    events = (client.data_dir / f"{sid}.jsonl").read_text().splitlines()
    kinds = [json.loads(line)["kind"] for line in events[1:]]
    assert kinds == ["search", "get_page"]


def test_every_call_logs_exactly_one_action(client):
    sid = open_session(client)["session_id"]
    client.get("/api/search", params={"session": sid, "q": "idiot"})
    client.get("/api/search", params={"session": sid, "q": "idiot", "filter": "toxic"})
    client.get("/api/random", params={"session": sid, "k": 2, "seed": 1})
    client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    client.post("/api/rules", params={"session": sid}, json={"keyword": "fucking"})
    client.delete("/api/rules/fucking", params={"session": sid})
    client.post("/api/actions", params={"session": sid},
                json={"kind": "clear_search"})
    client.post("/api/rules", params={"session": sid}, json={"keyword": "fuck"})
    client.post("/api/finish", params={"session": sid})

    events = (client.data_dir / f"{sid}.jsonl").read_text().splitlines()
    kinds = [json.loads(line)["kind"] for line in events[1:]]
    assert kinds == [
        "search",
        "filter_toxic",
        "load_random",
        "add_rule",
        "add_rule",
        "remove_rule",
        "clear_search",
        "add_rule",
        "finish",
    ]


def test_finish_returns_result_report_and_bonus(client):
    sid = open_session(client)["session_id"]
    client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    client.post("/api/rules", params={"session": sid}, json={"keyword": "fucking"})
    resp = client.post("/api/finish", params={"session": sid})
    assert resp.status_code == 200
    body = resp.json()
    assert body["result"]["n_rules"] == 2
    report = body["report"]
    assert report["average_precision"] == 0.75
    assert report["union_precision"] == 0.5
    assert report["coverage"] == 2
    assert report["reward"] == 0
    assert report["model_alone_precision"] == 2 / 3
    assert body["bonus_usd"] == report["bonus_usd"] == 0.0
    # the result document is persisted under the session id
    result_file = client.data_dir / f"{sid}.result.json"
    assert json.loads(result_file.read_text())["n_rules"] == 2


def test_finish_min_rules_message(client):
    sid = open_session(client)["session_id"]
    client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    resp = client.post("/api/finish", params={"session": sid})
    assert resp.status_code == 400
    assert resp.json()["error"] == "at least 2 rules required, have 1"


def test_manual_finish_report_has_no_model_baseline(client):
    sid = open_session(client, "manual")["session_id"]
    client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"})
    client.post("/api/rules", params={"session": sid}, json={"keyword": "fucking"})
    body = client.post("/api/finish", params={"session": sid}).json()
    report = body["report"]
    assert report["mode"] == "report_all"
    assert report["model_alone_precision"] is None
    assert abs(report["average_precision"] - 7 / 12) < 1e-12


def test_unknown_session_404(client):
    resp = client.get("/api/search", params={"session": "nope", "q": "idiot"})
    assert resp.status_code == 404
    assert resp.json()["error"] == "unknown session"


def test_chip_click_logged_as_global_token(client):
    sid = open_session(client, "labels_local_global")["session_id"]
    resp = client.get(
        "/api/search", params={"session": sid, "q": "fucking", "source": "chip"}
    )
    assert resp.status_code == 200
    assert resp.json()["total"] == 2
    events = (client.data_dir / f"{sid}.jsonl").read_text().splitlines()
    assert json.loads(events[-1])["kind"] == "click_global_token"
    # chips do not exist outside the full condition
    sid2 = open_session(client, "labels")["session_id"]
    resp = client.get(
        "/api/search", params={"session": sid2, "q": "fucking", "source": "chip"}
    )
    assert resp.status_code == 422


def test_nonmanual_session_on_bare_corpus_rejected(tmp_path):
    from condel.corpus import load_corpus, strip_predictions

    bare = strip_predictions(load_corpus(F1_PATH, name="f1"))
    config = ServerConfig(
        corpora={"f1": str(F1_PATH)}, data_dir=str(tmp_path / "s"), min_rules=2
    )
    app = create_app(config, corpora={"f1": (bare, build_index(bare))})
    with TestClient(app) as tc:
        resp = tc.post("/api/session", json={"condition": "labels", "corpus": "f1"})
        assert resp.status_code == 422
        resp = tc.post("/api/session", json={"condition": "manual", "corpus": "f1"})
        assert resp.status_code == 200


def test_gold_never_in_session_responses(client):
    sid = open_session(client, "labels_local_global")["session_id"]
    responses = [
        client.get("/api/search", params={"session": sid, "q": "idiot"}).json(),
        client.get("/api/random", params={"session": sid, "k": 6, "seed": 0}).json(),
        client.post("/api/rules", params={"session": sid}, json={"keyword": "idiot"}).json(),
        client.get("/api/rules", params={"session": sid}).json(),
    ]
    for payload in responses:
        assert scan_keys(payload, banned=("gold",)) == []
