"""Knowledge-graph store: append-only event log plus deterministic snapshot.

Every mutation is one NDJSON line (`{"seq": n, "type": "entity"|"triple"|"run",
...}`); replaying the log reproduces the in-memory state exactly, and the
snapshot serialization is canonical, so `snapshot(replay(log)) == snapshot(state)`
byte for byte. There is a single writer; readers work on immutable views.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..canonical import canonical_json
from ..records import RunRecord

LOG_NAME = "kg.log"
SNAPSHOT_NAME = "kg.snapshot.json"


class EntityKind(str, Enum):
    EXPERIMENT = "experiment"
    WORKFLOW = "workflow"
    TASK = "task"
    ALGORITHM = "algorithm"
    DATASET = "dataset"
    USER = "user"
    INTENT = "intent"
    METRIC = "metric"
    RUN = "run"


# relation name -> (head kind, tail kind)
RELATIONS: dict[str, tuple[EntityKind, EntityKind]] = {
    "ranBy": (EntityKind.EXPERIMENT, EntityKind.USER),
    "hasIntent": (EntityKind.EXPERIMENT, EntityKind.INTENT),
    "usesDataset": (EntityKind.RUN, EntityKind.DATASET),
    "usesAlgorithm": (EntityKind.RUN, EntityKind.ALGORITHM),
    "producedRun": (EntityKind.EXPERIMENT, EntityKind.RUN),
    "achievedMetric": (EntityKind.RUN, EntityKind.METRIC),
    "hasProficiency": (EntityKind.USER, EntityKind.ALGORITHM),
    "gaveFeedback": (EntityKind.USER, EntityKind.RUN),
    "partOfExperiment": (EntityKind.RUN, EntityKind.EXPERIMENT),
}


@dataclass(frozen=True)
class Entity:
    kind: EntityKind
    id: str

    @property
    def key(self) -> str:
        return f"{self.kind.value}:{self.id}"


@dataclass(frozen=True)
class Triple:
    head: Entity
    relation: str
    tail: Entity
    attrs: tuple[tuple[str, float], ...] = ()

    def attr_map(self) -> dict:
        return dict(self.attrs)


@dataclass
class KgStore:
    """In-memory graph state backed by an append-only log file."""

    path: Path | None = None
    entities: list[Entity] = field(default_factory=list)
    triples: list[Triple] = field(default_factory=list)
    runs: dict[str, RunRecord] = field(default_factory=dict)
    seq: int = 0
    _entity_set: set[str] = field(default_factory=set)
    _triple_set: set[str] = field(default_factory=set)
    _run_order: list[str] = field(default_factory=list)
    _by_fingerprint: dict[str, list[str]] = field(default_factory=dict)
    _by_experiment: dict[str, list[str]] = field(default_factory=dict)
    _by_caw_id: dict[str, list[str]] = field(default_factory=dict)
    _by_dataset: dict[str, list[str]] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # ------------------------------------------------------------------ io

    @classmethod
    def open(cls, directory: str | Path) -> "KgStore":
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        store = cls(path=directory / LOG_NAME)
        if store.path.exists():
            with open(store.path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if line:
                        store._apply(_loads(line), persist=False)
        return store

    @classmethod
    def replay(cls, log_path: str | Path) -> "KgStore":
        """Rebuild state from a log without attaching a writer."""
        store = cls(path=None)
        with open(log_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    store._apply(_loads(line), persist=False)
        return store

    def _append(self, event: dict) -> None:
        self._apply(event, persist=True)

    def _apply(self, event: dict, persist: bool) -> None:
        kind = event["type"]
        if persist:
            self.seq += 1
            event = {"seq": self.seq, **event}
        else:
            self.seq = max(self.seq, event.get("seq", 0))
        if kind == "entity":
            entity = Entity(EntityKind(event["kind"]), event["id"])
            if entity.key not in self._entity_set:
                self._entity_set.add(entity.key)
                self.entities.append(entity)
        elif kind == "triple":
            hk, hid = event["head"]
            tk, tid = event["tail"]
            triple = Triple(
                Entity(EntityKind(hk), hid),
                event["relation"],
                Entity(EntityKind(tk), tid),
                tuple(sorted(event.get("attrs", {}).items())),
            )
            key = canonical_json(_triple_obj(triple))
            if key not in self._triple_set:
                self._triple_set.add(key)
                self.triples.append(triple)
        elif kind == "run":
            record = RunRecord.from_obj(event["record"])
            if record.run_id not in self.runs:
                self.runs[record.run_id] = record
                self._run_order.append(record.run_id)
                self._by_fingerprint.setdefault(record.fingerprint, []).append(record.run_id)
                self._by_experiment.setdefault(record.experiment, []).append(record.run_id)
                self._by_caw_id.setdefault(record.caw_id, []).append(record.run_id)
                for digest in set(record.input_digests.values()):
                    self._by_dataset.setdefault(digest, []).append(record.run_id)
        else:
            raise ValueError(f"unknown log event type: {kind}")
        if persist and self.path is not None:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(canonical_json(event) + "\n")

    # ------------------------------------------------------------- mutation

    def add_entity(self, kind: EntityKind, entity_id: str) -> Entity:
        entity = Entity(kind, entity_id)
        with self._lock:
            if entity.key not in self._entity_set:
                self._append({"type": "entity", "kind": kind.value, "id": entity_id})
        return entity

    def add_triple(
        self,
        head: Entity,
        relation: str,
        tail: Entity,
        attrs: dict[str, float] | None = None,
    ) -> Triple | None:
        """Append a triple; returns None when it is an exact duplicate."""
        sig = RELATIONS.get(relation)
        if sig is None:
            raise ValueError(f"unknown relation '{relation}'")
        if head.kind is not sig[0] or tail.kind is not sig[1]:
            raise ValueError(
                f"relation '{relation}' expects {sig[0].value}->{sig[1].value}, "
                f"got {head.kind.value}->{tail.kind.value}"
            )
        triple = Triple(head, relation, tail, tuple(sorted((attrs or {}).items())))
        key = canonical_json(_triple_obj(triple))
        with self._lock:
            if key in self._triple_set:
                return None
            self._append(
                {
                    "type": "triple",
                    "head": [head.kind.value, head.id],
                    "relation": relation,
                    "tail": [tail.kind.value, tail.id],
                    "attrs": triple.attr_map(),
                }
            )
        return triple

    def add_run(self, record: RunRecord) -> bool:
        with self._lock:
            if record.run_id in self.runs:
                return False
            self._append({"type": "run", "record": record.to_obj()})
        return True

    # -------------------------------------------------------------- queries

    def has_entity(self, kind: EntityKind, entity_id: str) -> bool:
        return f"{kind.value}:{entity_id}" in self._entity_set

    def entities_of_kind(self, kind: EntityKind) -> list[Entity]:
        return [e for e in self.entities if e.kind is kind]

    def run_records(self) -> list[RunRecord]:
        return [self.runs[rid] for rid in self._run_order]

    def runs_by_experiment(self, experiment: str) -> list[RunRecord]:
        return [self.runs[rid] for rid in self._by_experiment.get(experiment, [])]

    def runs_by_dataset(self, digest: str) -> list[RunRecord]:
        return [self.runs[rid] for rid in self._by_dataset.get(digest, [])]

    def runs_by_fingerprint(self, fingerprint: str) -> list[RunRecord]:
        return [self.runs[rid] for rid in self._by_fingerprint.get(fingerprint, [])]

    def runs_by_caw_id(self, caw_id: str) -> list[RunRecord]:
        return [self.runs[rid] for rid in self._by_caw_id.get(caw_id, [])]

    # ------------------------------------------------------------- snapshot

    def snapshot(self) -> str:
        """Canonical JSON document of the full state (deterministic bytes)."""
        obj = {
            "entities": sorted([e.kind.value, e.id] for e in self.entities),
            "triples": sorted(
                (_triple_obj(t) for t in self.triples),
                key=canonical_json,
            ),
            "runs": {rid: self.runs[rid].to_obj() for rid in sorted(self.runs)},
            "seq": self.seq,
        }
        return canonical_json(obj)

    def save_snapshot(self, directory: str | Path | None = None) -> Path:
        if directory is None:
            if self.path is None:
                raise ValueError("store has no directory")
            directory = self.path.parent
        path = Path(directory) / SNAPSHOT_NAME
        path.write_text(self.snapshot(), encoding="utf-8")
        return path


def _triple_obj(triple: Triple) -> dict:
    return {
        "head": [triple.head.kind.value, triple.head.id],
        "relation": triple.relation,
        "tail": [triple.tail.kind.value, triple.tail.id],
        "attrs": triple.attr_map(),
    }


def _loads(line: str):
    import json

    return json.loads(line)
