"""HTTP facade tests: status codes, auth, and a scripted end-to-end client."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from oddoneout.model import IndependentSpec, sample_independent
from oddoneout.service import create_app
from oddoneout.session import Session, SessionStore


@pytest.fixture()
def client(tmp_path, monkeypatch):
    monkeypatch.delenv("ODDONEOUT_TOKEN", raising=False)
    app = create_app(SessionStore(tmp_path / "sessions"))
    with TestClient(app) as c:
        yield c


def manifest_body(n=5):
    return {
        "title": "faces",
        "items": [
            {"id": f"it{i}", "media": f"https://cdn/{i}.jpg", "kind": "image"}
            for i in range(n)
        ],
    }


def create(client, n=5, **config) -> str:
    r = client.post("/sessions", json={"manifest": manifest_body(n), "config": config})
    assert r.status_code == 201, r.text
    return r.json()["id"]


class TestEndpoints:
    def test_create_and_first_task(self, client):
        sid = create(client)
        task = client.get(f"/sessions/{sid}/task").json()
        assert task["kind"] == "elicit_triple"
        assert len(task["items"]) == 3

    def test_too_small_manifest_400(self, client):
        r = client.post(
            "/sessions",
            json={"manifest": manifest_body(2), "config": {}},
        )
        assert r.status_code == 400

    def test_duplicate_ids_400(self, client):
        body = manifest_body(3)
        body["items"][1]["id"] = body["items"][0]["id"]
        r = client.post("/sessions", json={"manifest": body, "config": {}})
        assert r.status_code == 400

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/none/task").status_code == 404
        assert client.get("/sessions/none/export").status_code == 404

    def test_stale_task_409(self, client):
        sid = create(client)
        client.get(f"/sessions/{sid}/task")
        r = client.post(
            f"/sessions/{sid}/elicitation",
            json={"task_id": "t99", "feature_name": "x", "chosen": ["it0", "it1"]},
        )
        assert r.status_code == 409

    def test_validation_400(self, client):
        sid = create(client)
        task = client.get(f"/sessions/{sid}/task").json()
        r = client.post(
            f"/sessions/{sid}/elicitation",
            json={"task_id": task["task_id"], "feature_name": "x", "chosen": ["it0"]},
        )
        assert r.status_code == 400

    def test_metrics_endpoint(self, client):
        sid = create(client)
        m = client.get(f"/sessions/{sid}/metrics").json()
        assert m["g"] == 1.0
        assert m["features"] == []


class TestAuth:
    def test_token_required_when_configured(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ODDONEOUT_TOKEN", "sekret")
        app = create_app(SessionStore(tmp_path / "s"))
        with TestClient(app) as c:
            r = c.post("/sessions", json={"manifest": manifest_body(), "config": {}})
            assert r.status_code == 401
            r = c.post(
                "/sessions",
                json={"manifest": manifest_body(), "config": {}},
                headers={"Authorization": "Bearer sekret"},
            )
            assert r.status_code == 201


class ScriptedHttpClient:
    """Simulates the human worker against the HTTP API from a hidden matrix."""

    def __init__(self, client, sid, matrix):
        self.client = client
        self.sid = sid
        self.matrix = matrix
        self.named: dict[str, int] = {}

    def idx(self, item_id):
        return int(item_id.removeprefix("it"))

    def drive(self, max_steps=300):
        for _ in range(max_steps):
            task = self.client.get(f"/sessions/{self.sid}/task").json()
            if task["kind"] == "done":
                return task
            if task["kind"].startswith("elicit"):
                self.elicit(task)
            else:
                self.label(task)
        raise AssertionError("did not finish")

    def elicit(self, task):
        ids = [it["id"] for it in task["items"]]
        rows = [self.idx(i) for i in ids]
        want = 2 if len(rows) == 3 else 1
        cands = [
            j for j in range(self.matrix.n_features)
            if int(self.matrix.bits[rows, j].sum()) == want
        ]
        if not cands:
            body = {"task_id": task["task_id"], "feature_name": None, "chosen": None}
        else:
            j = cands[0]
            self.named[f"feat{j}"] = j
            chosen = [i for i, r in zip(ids, rows) if self.matrix.bits[r, j]]
            body = {"task_id": task["task_id"], "feature_name": f"feat{j}", "chosen": chosen}
        r = self.client.post(f"/sessions/{self.sid}/elicitation", json=body)
        assert r.status_code == 200, r.text

    def label(self, task):
        j = self.named[task["feature"]]
        bits = "".join(
            str(int(self.matrix.bits[self.idx(it["id"]), j])) for it in task["items"]
        )
        r = self.client.post(
            f"/sessions/{self.sid}/labels",
            json={"task_id": task["task_id"], "voter": "scripted", "bits": bits},
        )
        assert r.status_code == 200, r.text


class TestScriptedEndToEnd:
    def test_full_flow_export_matches_truth(self, client):
        truth = sample_independent(IndependentSpec.uniform(4, 0.5), 5, seed=13)
        sid = create(client, n=5, seed=3)
        driver = ScriptedHttpClient(client, sid, truth)
        done = driver.drive()
        assert done["reason"] == "exhaustion"
        export = client.get(f"/sessions/{sid}/export").json()
        names = export["matrix"]["feature_names"]
        rows = export["matrix"]["rows"]
        for k, name in enumerate(names):
            j = driver.named[name]
            got = [int(r[k]) for r in rows]
            assert got == [int(b) for b in truth.bits[:, j]]
        # transcript replay reproduces the export byte-identically
        rebuilt = Session.replay(export["transcript"])
        assert rebuilt.export() == export

    def test_served_triples_unresolved_at_serve_time(self, client):
        truth = sample_independent(IndependentSpec.uniform(3, 0.5), 6, seed=2)
        sid = create(client, n=6, seed=8)
        driver = ScriptedHttpClient(client, sid, truth)
        committed: list[tuple[str, str]] = []
        for _ in range(200):
            task = client.get(f"/sessions/{sid}/task").json()
            if task["kind"] == "done":
                break
            if task["kind"].startswith("elicit"):
                export = client.get(f"/sessions/{sid}/export").json()
                rows = export["matrix"]["rows"]
                idx = [driver.idx(it["id"]) for it in task["items"]]
                for k in range(len(export["matrix"]["feature_names"])):
                    assert sum(int(rows[i][k]) for i in idx) != 2
                driver.elicit(task)
            else:
                driver.label(task)

    def test_g_decreases_over_session(self, client):
        truth = sample_independent(IndependentSpec.uniform(3, 0.5), 6, seed=4)
        sid = create(client, n=6, seed=1)
        driver = ScriptedHttpClient(client, sid, truth)
        g_values = [client.get(f"/sessions/{sid}/metrics").json()["g"]]
        for _ in range(100):
            task = client.get(f"/sessions/{sid}/task").json()
            if task["kind"] == "done":
                break
            if task["kind"].startswith("elicit"):
                driver.elicit(task)
            else:
                driver.label(task)
                g_values.append(client.get(f"/sessions/{sid}/metrics").json()["g"])
        assert g_values[0] == 1.0
        assert all(b <= a for a, b in zip(g_values, g_values[1:]))
