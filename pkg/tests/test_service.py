"""HTTP service coverage: endpoints, error envelopes, session persistence."""

import base64
import io
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from kymosnake.image import GrayImage, load_pgm, save_pgm
from kymosnake.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(store_dir=str(tmp_path / "sessions"))
    with TestClient(app) as c:
        yield c


def synthesize(client, **overrides):
    payload = {"preset": "high", "periods": 2, "seed": 3}
    payload.update(overrides)
    payload = {k: v for k, v in payload.items() if v is not None}
    resp = client.post("/api/synthesize", json=payload)
    assert resp.status_code == 200, resp.text
    return resp.json()


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------

def test_synthesize_returns_image_string_and_truth(client):
    body = synthesize(client)
    assert set(body) == {"session_id", "pgm_base64", "vstring", "ground_truth"}
    img = load_pgm(base64.b64decode(body["pgm_base64"]))
    assert img.height == 64
    assert len(body["ground_truth"]["edges"]) == img.width
    assert set(body["vstring"]) <= set("ocx")


def test_synthesize_accepts_inline_spec(client):
    body = synthesize(client, preset=None, periods=1, spec={
        "closed": 3, "opening": 4, "closing": 4, "amplitude": 6,
        "height": 20,
    })
    img = load_pgm(base64.b64decode(body["pgm_base64"]))
    assert img.height == 20
    assert len(body["vstring"]) == 11


def test_synthesize_rejects_preset_and_spec_together(client):
    resp = client.post("/api/synthesize", json={
        "preset": "high", "spec": {"closed": 3, "opening": 4, "closing": 4},
    })
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


def test_synthesize_rejects_unknown_preset(client):
    resp = client.post("/api/synthesize", json={"preset": "whisper"})
    assert resp.status_code == 422
    body = resp.json()
    assert body["error"] == "domain"
    assert "whisper" in body["detail"]


def test_synthesize_rejects_unknown_spec_keys(client):
    resp = client.post("/api/synthesize", json={
        "spec": {"closed": 3, "opening": 4, "closing": 4, "colour": 1},
    })
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------

def test_upload_creates_session_with_midline(client):
    spec_body = synthesize(client)
    pgm = base64.b64decode(spec_body["pgm_base64"])
    resp = client.post("/api/sessions",
                       files={"file": ("k.pgm", io.BytesIO(pgm), "image/x-portable-graymap")})
    assert resp.status_code == 200
    body = resp.json()
    assert body["midline_estimate"] == spec_body["ground_truth"]["midline"]
    assert body["width"] == len(spec_body["vstring"])
    assert body["height"] == 64


def test_upload_of_flat_image_reports_no_signal(client):
    flat = save_pgm(GrayImage(pixels=np.zeros((8, 8), dtype=np.int64)))
    resp = client.post("/api/sessions", files={"file": ("flat.pgm", io.BytesIO(flat), "")})
    assert resp.status_code == 422
    assert resp.json()["error"] == "no-signal"


def test_upload_of_garbage_is_a_domain_error(client):
    resp = client.post("/api/sessions", files={"file": ("x.pgm", io.BytesIO(b"nope"), "")})
    assert resp.status_code == 422
    assert resp.json()["error"] == "domain"


def test_get_session_returns_stored_record(client):
    body = synthesize(client)
    resp = client.get(f"/api/sessions/{body['session_id']}")
    assert resp.status_code == 200
    record = resp.json()
    assert record["session_id"] == body["session_id"]
    assert record["vstring"] == body["vstring"]
    assert record["history"] == []


def test_unknown_session_is_404(client):
    resp = client.get("/api/sessions/0123456789abcdef")
    assert resp.status_code == 404
    assert resp.json() == {"error": "not-found",
                           "detail": "no session '0123456789abcdef'"}


def test_malformed_session_id_is_404_not_path_escape(client):
    resp = client.get("/api/sessions/..%2f..%2fetc")
    assert resp.status_code == 404


# ---------------------------------------------------------------------------
# deform
# ---------------------------------------------------------------------------

def test_deform_pair_mode_recovers_edges(client):
    body = synthesize(client)
    sid = body["session_id"]
    resp = client.post(f"/api/sessions/{sid}/deform", json={
        "params": {"alpha": 1.0, "beta": 1.0, "gamma": 1.0},
        "init": {"midline": body["ground_truth"]["midline"], "band_halfwidth": 12},
    })
    assert resp.status_code == 200, resp.text
    result = resp.json()
    assert set(result) == {"midline", "upper", "lower"}
    uppers = [y for _, y in result["upper"]["snake"]["snaxels"]]
    lowers = [y for _, y in result["lower"]["snake"]["snaxels"]]
    edges = body["ground_truth"]["edges"]
    assert uppers == [e[0] for e in edges]
    assert lowers == [e[1] for e in edges]
    assert result["upper"]["converged"] and result["lower"]["converged"]


def test_deform_step_mode_continues_where_it_left_off(client):
    body = synthesize(client)
    sid = body["session_id"]
    url = f"/api/sessions/{sid}/deform"
    first = client.post(url, json={
        "params": {},
        "init": {"midline": body["ground_truth"]["midline"], "band_halfwidth": 12},
        "step_mode": True,
    })
    assert first.status_code == 200
    assert first.json()["upper"]["iterations"] == 1

    second = client.post(url, json={"params": {}, "step_mode": True})
    assert second.status_code == 200
    assert second.json()["upper"]["iterations"] == 1
    # stepping twice from the stored state matches one two-iteration run
    fresh = client.post(url, json={
        "params": {},
        "init": {"midline": body["ground_truth"]["midline"], "band_halfwidth": 12},
        "max_iter": 2,
    })
    assert fresh.json()["upper"]["snake"] == second.json()["upper"]["snake"]


def test_deform_without_init_or_state_is_a_validation_error(client):
    sid = synthesize(client)["session_id"]
    resp = client.post(f"/api/sessions/{sid}/deform", json={"params": {}})
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


def test_deform_free_mode_with_constraints(client):
    body = synthesize(client)
    sid = body["session_id"]
    width = len(body["vstring"])
    snake = {"closed": False, "snaxels": [[x, 20] for x in range(width)]}
    resp = client.post(f"/api/sessions/{sid}/deform", json={
        "params": {"gamma": 2.0},
        "init": {"snake": snake},
        "constraints": {"column_locked": True},
        "max_iter": 40,
    })
    assert resp.status_code == 200
    result = resp.json()
    assert set(result) == {"snake", "trace", "iterations", "converged"}
    trace = result["trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert all(s[0] == x for x, s in enumerate(result["snake"]["snaxels"]))


def test_deform_records_append_only_history(client):
    body = synthesize(client)
    sid = body["session_id"]
    url = f"/api/sessions/{sid}/deform"
    init = {"midline": body["ground_truth"]["midline"], "band_halfwidth": 10}
    client.post(url, json={"params": {}, "init": init, "step_mode": True})
    client.post(url, json={"params": {}, "step_mode": True})
    record = client.get(f"/api/sessions/{sid}").json()
    assert len(record["history"]) == 2
    assert all(entry["step_mode"] for entry in record["history"])
    assert record["history"][0]["params"] == record["history"][1]["params"]


def test_deform_rejects_out_of_range_midline(client):
    sid = synthesize(client)["session_id"]
    resp = client.post(f"/api/sessions/{sid}/deform", json={
        "params": {},
        "init": {"midline": 500, "band_halfwidth": 5},
    })
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


def test_deform_on_missing_session_is_404(client):
    resp = client.post("/api/sessions/0123456789abcdef/deform",
                       json={"params": {}, "init": {"midline": 3, "band_halfwidth": 2}})
    assert resp.status_code == 404


# ---------------------------------------------------------------------------
# decide / dfa / pair
# ---------------------------------------------------------------------------

def test_decide_accept(client):
    resp = client.post("/api/decide", json={"vstring": "xxoocc"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["verdict"] == "accept"
    assert body["runs"] == [["x", 2], ["o", 2], ["c", 2]]
    assert "violation" not in body


def test_decide_reject_carries_violation(client):
    resp = client.post("/api/decide",
                       json={"vstring": "x" * 5 + "o" * 8 + "c" * 8,
                             "c": [1, 1, 1], "eps": 0.2})
    assert resp.status_code == 200
    body = resp.json()
    assert body["verdict"] == "reject"
    assert "deviating" in body["violation"]


def test_decide_foreign_symbol_is_domain_error(client):
    resp = client.post("/api/decide", json={"vstring": "abc"})
    assert resp.status_code == 422
    assert resp.json()["error"] == "domain"


def test_decide_requires_string_vstring(client):
    resp = client.post("/api/decide", json={"vstring": 7})
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


def test_dfa_endpoint_runs_pattern(client):
    resp = client.post("/api/dfa", json={"pattern": "CoRR", "input": "CoCoRR"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["verdict"] == "accept"
    assert body["final_state"] == 4


def test_dfa_explicit_alphabet_mismatch_is_domain_error(client):
    resp = client.post("/api/dfa",
                       json={"pattern": "ab", "input": "aa", "alphabet": "a"})
    assert resp.status_code == 422
    assert resp.json()["error"] == "domain"


def test_pair_endpoint_all_operations(client):
    checks = [
        ({"op": "encode", "args": [0, 4]}, 14),
        ({"op": "decode", "args": [14]}, [0, 4]),
        ({"op": "triple", "args": [1, 1, 1]}, 19),
        ({"op": "untriple", "args": [19]}, [1, 1, 1]),
    ]
    for payload, expected in checks:
        resp = client.post("/api/pair", json=payload)
        assert resp.status_code == 200, resp.text
        assert resp.json()["result"] == expected


def test_pair_endpoint_checks_arity_and_types(client):
    resp = client.post("/api/pair", json={"op": "encode", "args": [1]})
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"
    resp = client.post("/api/pair", json={"op": "encode", "args": [True, 2]})
    assert resp.status_code == 422
    resp = client.post("/api/pair", json={"op": "halve", "args": [2]})
    assert resp.status_code == 422


def test_presets_listing(client):
    resp = client.get("/api/presets")
    assert resp.status_code == 200
    body = resp.json()
    assert set(body) == {"habitual", "high", "breathy", "falsetto"}
    assert body["habitual"]["amplitude"] == 12


def test_malformed_json_body_is_a_validation_error(client):
    resp = client.post("/api/decide", content=b"{not json",
                       headers={"content-type": "application/json"})
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation"


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_session_ids_replay_deterministically(tmp_path):
    def run_sequence(store):
        app = create_app(store_dir=str(store))
        with TestClient(app) as c:
            first = synthesize(c)
            second = synthesize(c, seed=9)
            c.post(f"/api/sessions/{first['session_id']}/deform", json={
                "params": {},
                "init": {"midline": first["ground_truth"]["midline"],
                         "band_halfwidth": 10},
            })
            record = c.get(f"/api/sessions/{first['session_id']}").json()
        return first, second, record

    a = run_sequence(tmp_path / "one")
    b = run_sequence(tmp_path / "two")
    assert a == b
    assert a[0]["session_id"] != a[1]["session_id"]


def test_store_survives_app_restart(tmp_path):
    store = tmp_path / "sessions"
    app = create_app(store_dir=str(store))
    with TestClient(app) as c:
        sid = synthesize(c)["session_id"]

    reopened = create_app(store_dir=str(store))
    with TestClient(reopened) as c:
        resp = c.get(f"/api/sessions/{sid}")
        assert resp.status_code == 200
        assert resp.json()["session_id"] == sid


def test_store_layout_is_one_json_and_one_pgm_per_session(tmp_path):
    store = tmp_path / "sessions"
    app = create_app(store_dir=str(store))
    with TestClient(app) as c:
        sid = synthesize(c)["session_id"]
    names = sorted(p.name for p in store.iterdir())
    assert names == [f"{sid}.json", f"{sid}.pgm"]
    record = json.loads((store / f"{sid}.json").read_text())
    assert record["session_id"] == sid
