"""HTTP service: submission, prompts, events, production metrics, KR queries."""

from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from conftest import fixture_source

from xpengine.service import EngineService, create_app


@pytest.fixture
def client(tmp_path):
    service = EngineService(tmp_path / "store", base_dir=tmp_path)
    app = create_app(service)
    with TestClient(app) as c:
        c.service = service
        yield c


def wait_status(client: TestClient, experiment: str, timeout: float = 30.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/experiments/{experiment}").json()
        if body["status"] != "running":
            return body
        time.sleep(0.05)
    raise TimeoutError(f"experiment {experiment} still running")


def sse_events(client: TestClient, experiment: str, since: int = 0) -> list[dict]:
    resp = client.get(f"/experiments/{experiment}/events", params={"since": since, "follow": 0})
    assert resp.status_code == 200
    events = []
    for line in resp.text.splitlines():
        if line.startswith("data: "):
            events.append(json.loads(line[len("data: ") :]))
    return events


def wait_prompt(client: TestClient, experiment: str, timeout: float = 15.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        opened = [e for e in sse_events(client, experiment) if e["kind"] == "PromptOpened"]
        resolved = {
            e["payload"]["prompt_id"]
            for e in sse_events(client, experiment)
            if e["kind"] == "PromptResolved"
        }
        for event in opened:
            if event["payload"]["prompt_id"] not in resolved:
                return event["payload"]
        time.sleep(0.05)
    raise TimeoutError("no open prompt appeared")


class TestSubmit:
    def test_valid_spec_starts_and_completes(self, client, tmp_path):
        resp = client.post("/experiments", content=fixture_source(tmp_path / "d"))
        assert resp.status_code == 201
        experiment = resp.json()["id"]
        body = wait_status(client, experiment)
        assert body["status"] == "completed"
        assert body["best"]["value"] == 0.88
        assert body["runs"] == 9

    def test_broken_spec_422_with_positions(self, client):
        resp = client.post("/experiments", content="experiment nope {")
        assert resp.status_code == 422
        errors = resp.json()["errors"]
        assert errors and errors[0]["line"] >= 1 and errors[0]["column"] >= 1

    def test_semantic_error_422(self, client, tmp_path):
        source = fixture_source(tmp_path / "d").replace(
            "intent maximize accuracy;", "intent maximize f1;"
        )
        resp = client.post("/experiments", content=source)
        assert resp.status_code == 422
        assert any(e["code"] == "UndeclaredMetric" for e in resp.json()["errors"])

    def test_duplicate_name_409(self, client, tmp_path):
        source = fixture_source(tmp_path / "d")
        assert client.post("/experiments", content=source).status_code == 201
        assert client.post("/experiments", content=source).status_code == 409

    def test_unknown_experiment_404(self, client):
        assert client.get("/experiments/ghost").status_code == 404
        assert client.get("/experiments/ghost/runs").status_code == 404


class TestEvents:
    def test_seq_strictly_increasing_and_replayable(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        events = sse_events(client, "predictive_maintenance")
        seqs = [e["seq"] for e in events]
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
        kinds = {e["kind"] for e in events}
        assert {"RunStarted", "RunFinished", "ExperimentFinished"} <= kinds

    def test_since_filters_backlog(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        all_events = sse_events(client, "predictive_maintenance")
        later = sse_events(client, "predictive_maintenance", since=all_events[4]["seq"])
        assert later[0]["seq"] == all_events[4]["seq"] + 1

    def test_replay_reconstructs_run_table(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        events = sse_events(client, "predictive_maintenance")
        folded = {}
        for event in events:
            if event["kind"] == "RunFinished":
                folded[event["payload"]["run_id"]] = event["payload"]["metrics"]
        rows = client.get("/experiments/predictive_maintenance/runs").json()["runs"]
        assert len(rows) == 9
        assert {r["run_id"]: r["metrics"] for r in rows} == folded


class TestPrompts:
    INTERACTION = """  interaction {
    checkpoint after 5 configurations role supervisor cost 1 min;
    budget 10 min;
  }
"""

    def _submit(self, client, tmp_path, name="steered"):
        source = fixture_source(tmp_path / "d", name=name, extra_sections=self.INTERACTION)
        resp = client.post("/experiments", content=source)
        assert resp.status_code == 201, resp.text
        return name

    def test_prune_via_http_reduces_runs(self, client, tmp_path):
        name = self._submit(client, tmp_path)
        prompt = wait_prompt(client, name)
        assert prompt["role"] == "supervisor"
        pending = prompt["payload"]["pending"]
        assert pending == [5, 6, 7, 8]
        resp = client.post(
            f"/prompts/{prompt['prompt_id']}/response",
            json={"action": "prune", "ordinals": pending[:2]},
        )
        assert resp.status_code == 200
        body = wait_status(client, name)
        assert body["runs"] == 7
        pruned_events = [e for e in sse_events(client, name) if e["kind"] == "SchedulePruned"]
        assert any(e["payload"]["by"] == "supervisor" for e in pruned_events)

    def test_resolved_prompt_conflicts(self, client, tmp_path):
        name = self._submit(client, tmp_path, "steered2")
        prompt = wait_prompt(client, name)
        first = client.post(f"/prompts/{prompt['prompt_id']}/response", json={"action": "continue"})
        assert first.status_code == 200
        wait_status(client, name)
        again = client.post(f"/prompts/{prompt['prompt_id']}/response", json={"action": "continue"})
        assert again.status_code == 409

    def test_unknown_prompt_404(self, client):
        assert client.post("/prompts/ghost/response", json={"action": "continue"}).status_code == 404

    def test_prune_non_pending_422(self, client, tmp_path):
        name = self._submit(client, tmp_path, "steered3")
        prompt = wait_prompt(client, name)
        resp = client.post(
            f"/prompts/{prompt['prompt_id']}/response",
            json={"action": "prune", "ordinals": [0]},  # ordinal 0 already ran
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "UnknownConfig"
        # prompt is still open; release it so the experiment can finish
        client.post(f"/prompts/{prompt['prompt_id']}/response", json={"action": "continue"})
        wait_status(client, name)


MONITOR = """  monitor {
    metric accuracy threshold 0.8 window 20 min_new 1000;
  }
"""


class TestProductionMetrics:
    def _finished_fixture(self, client, tmp_path, name="monitored"):
        source = fixture_source(tmp_path / "d", name=name, extra_sections=MONITOR)
        resp = client.post("/experiments", content=source)
        assert resp.status_code == 201, resp.text
        wait_status(client, name)
        return name

    def test_drift_fires_and_schedules_pruned_reexecution(self, client, tmp_path):
        name = self._finished_fixture(client, tmp_path)
        result = None
        for _ in range(20):
            resp = client.post(
                f"/experiments/{name}/production-metrics",
                json={"metric": "accuracy", "value": 0.5},
            )
            assert resp.status_code == 200
            result = resp.json()
        assert result["trigger"] == "drift"
        assert len(result["scheduled"]) <= 5
        assert len(result["scheduled"]) + len(result["pruned"]) == 9
        fired = [e for e in sse_events(client, name) if e["kind"] == "TriggerFired"]
        assert fired and fired[-1]["payload"]["reason"] == "drift"
        retrain = result["experiment"]
        body = wait_status(client, retrain)
        assert body["runs"] == len(result["scheduled"])

    def test_healthy_values_plain_ack(self, client, tmp_path):
        name = self._finished_fixture(client, tmp_path, "monitored2")
        resp = client.post(
            f"/experiments/{name}/production-metrics",
            json={"metric": "accuracy", "value": 0.95},
        )
        assert resp.status_code == 200
        assert resp.json()["trigger"] is None

    def test_unmonitored_metric_422(self, client, tmp_path):
        name = self._finished_fixture(client, tmp_path, "monitored3")
        resp = client.post(
            f"/experiments/{name}/production-metrics",
            json={"metric": "latency", "value": 1.0},
        )
        assert resp.status_code == 422

    def test_unknown_experiment_404(self, client):
        resp = client.post(
            "/experiments/ghost/production-metrics", json={"metric": "accuracy", "value": 1.0}
        )
        assert resp.status_code == 404


class TestKrEndpoints:
    def test_lineage_by_experiment(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        resp = client.get("/kr/lineage", params={"experiment": "predictive_maintenance"})
        assert resp.status_code == 200
        assert len(resp.json()["runs"]) == 9

    def test_lineage_requires_one_selector(self, client):
        assert client.get("/kr/lineage").status_code == 422

    def test_recommendations_after_runs(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        resp = client.get(
            "/kr/recommendations",
            params={"user": "default", "intent": "maximize-accuracy", "k": 2},
        )
        assert resp.status_code == 200
        items = resp.json()["items"]
        assert len(items) == 2
        assert all(i["kind"] == "algorithm" for i in items)

    def test_recommendations_without_context_422(self, client, tmp_path):
        client.post("/experiments", content=fixture_source(tmp_path / "d"))
        wait_status(client, "predictive_maintenance")
        resp = client.get("/kr/recommendations", params={"user": "nobody", "k": 2})
        assert resp.status_code == 422
