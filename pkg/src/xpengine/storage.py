"""On-disk layout of an engine store.

A store directory holds everything one engine instance accumulates:

    <store>/
      kg.log                      append-only knowledge-graph event log
      kg.snapshot.json            canonical snapshot (rewritten after runs)
      profiles.json               per-user interaction profiles
      runs/<experiment>/
        events.ndjson             the experiment's event stream
        report.json               final experiment report
        export.json               canonical export of the run records
        <run_id>/<task>/          manifest.json, log.txt, result.json, artifacts

Artifact paths in records are store-root-relative, which keeps exports
byte-comparable across store locations.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .canonical import canonical_json, digest_file
from .errors import MissingInputError
from .events import EventLog
from .interaction import UserProfile
from .kg.store import KgStore
from .records import RunRecord, TaskResult, TaskStatus

PROFILES_NAME = "profiles.json"


class RunStore:
    """One engine store: knowledge graph, run artifacts, profiles."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.kg = KgStore.open(self.root)
        self._digest_cache: dict[str, str] = {}
        self._profiles_lock = threading.Lock()
        self._task_cache: dict[str, TaskResult] = {}
        for record in self.kg.run_records():
            self._index_task_results(record)

    # ----------------------------------------------------------- run layout

    def experiment_dir(self, experiment: str) -> Path:
        path = self.root / "runs" / experiment
        path.mkdir(parents=True, exist_ok=True)
        return path

    def run_dir(self, experiment: str, run_id: str) -> Path:
        path = self.experiment_dir(experiment) / run_id
        path.mkdir(parents=True, exist_ok=True)
        return path

    def task_dir(self, experiment: str, run_id: str, task: str) -> Path:
        path = self.run_dir(experiment, run_id) / task
        path.mkdir(parents=True, exist_ok=True)
        return path

    def relative(self, path: Path) -> str:
        return str(path.relative_to(self.root))

    def event_log(self, experiment: str) -> EventLog:
        return EventLog(self.experiment_dir(experiment) / "events.ndjson")

    # -------------------------------------------------------------- records

    def record_run(self, record: RunRecord) -> bool:
        """Index a fresh run for task-level caching; KG ingest happens separately."""
        self._index_task_results(record)
        return True

    def _index_task_results(self, record: RunRecord) -> None:
        for result in record.tasks:
            if (
                result.status is TaskStatus.OK
                and result.cache_key
                and result.cache_key not in self._task_cache
            ):
                self._task_cache[result.cache_key] = result

    def cached_task(self, cache_key: str) -> TaskResult | None:
        return self._task_cache.get(cache_key)

    def write_report(self, experiment: str, report_obj: dict) -> Path:
        path = self.experiment_dir(experiment) / "report.json"
        path.write_text(canonical_json(report_obj), encoding="utf-8")
        return path

    def read_report(self, experiment: str) -> dict | None:
        path = self.root / "runs" / experiment / "report.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def write_export(self, experiment: str, records: list[RunRecord]) -> Path:
        path = self.experiment_dir(experiment) / "export.json"
        obj = {"experiment": experiment, "results": [r.to_obj() for r in records]}
        path.write_text(canonical_json(obj), encoding="utf-8")
        return path

    # -------------------------------------------------------------- digests

    def digest_input(self, ref: str, path: Path) -> str:
        """Content digest of a resolved input file, cached by absolute path."""
        key = str(path)
        if key not in self._digest_cache:
            if not path.is_file():
                raise MissingInputError(ref, str(path))
            self._digest_cache[key] = digest_file(path)
        return self._digest_cache[key]

    # ------------------------------------------------------------- profiles

    def _profiles_path(self) -> Path:
        return self.root / PROFILES_NAME

    def load_profile(self, user: str) -> UserProfile:
        with self._profiles_lock:
            path = self._profiles_path()
            if path.exists():
                data = json.loads(path.read_text(encoding="utf-8"))
                if user in data:
                    return UserProfile.from_obj(data[user])
            return UserProfile(user=user)

    def save_profile(self, profile: UserProfile) -> None:
        with self._profiles_lock:
            path = self._profiles_path()
            data = {}
            if path.exists():
                data = json.loads(path.read_text(encoding="utf-8"))
            data[profile.user] = profile.to_obj()
            path.write_text(canonical_json(data), encoding="utf-8")
