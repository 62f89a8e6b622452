"""Record a steered fixture run for the dashboard's replay tests.

Runs the 5-task demo experiment with a supervisor checkpoint, prunes two
pending configurations through the HTTP API, and captures the resulting event
log, run table, and experiment summary into frontend/test/fixtures/.
"""

from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from conftest import fixture_source  # noqa: E402

from xpengine.service import EngineService, create_app  # noqa: E402

FIXTURES = ROOT / "frontend" / "test" / "fixtures"

INTERACTION = """  interaction {
    checkpoint after 5 configurations role supervisor cost 2 min;
    budget 10 min;
  }
"""


def sse_events(client: TestClient, experiment: str) -> list[dict]:
    resp = client.get(f"/experiments/{experiment}/events", params={"since": 0, "follow": 0})
    events = []
    for line in resp.text.splitlines():
        if line.startswith("data: "):
            events.append(json.loads(line[len("data: ") :]))
    return events


def main() -> None:
    tmp = Path(tempfile.mkdtemp(prefix="ui-fixture-"))
    service = EngineService(tmp / "store", base_dir=tmp)
    client = TestClient(create_app(service))

    source = fixture_source(tmp / "data", extra_sections=INTERACTION)
    resp = client.post("/experiments", content=source)
    assert resp.status_code == 201, resp.text
    experiment = resp.json()["id"]

    prompt_id = None
    deadline = time.time() + 30
    while time.time() < deadline and prompt_id is None:
        for event in sse_events(client, experiment):
            if event["kind"] == "PromptOpened":
                prompt_id = event["payload"]["prompt_id"]
                break
        time.sleep(0.05)
    assert prompt_id, "no checkpoint prompt appeared"

    resp = client.post(f"/prompts/{prompt_id}/response", json={"action": "prune", "ordinals": [5, 6]})
    assert resp.status_code == 200, resp.text
    service.wait(experiment, timeout=30)

    FIXTURES.mkdir(parents=True, exist_ok=True)
    events = sse_events(client, experiment)
    runs = client.get(f"/experiments/{experiment}/runs").json()
    summary = client.get(f"/experiments/{experiment}").json()
    (FIXTURES / "events.json").write_text(json.dumps(events, indent=1, sort_keys=True))
    (FIXTURES / "runs.json").write_text(json.dumps(runs, indent=1, sort_keys=True))
    (FIXTURES / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True))
    print(f"recorded {len(events)} events, {len(runs['runs'])} runs -> {FIXTURES}")


if __name__ == "__main__":
    main()
