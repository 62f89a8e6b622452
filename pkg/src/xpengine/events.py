"""Per-experiment event stream: sequenced, persisted, subscribable.

Every schedule decision and state change the engine makes is visible here
(and only here): the dashboard, the SSE endpoint, and the recorded fixture
logs are all folds of this stream. Sequence numbers start at 1 and are
strictly increasing per experiment.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_json

RUN_STARTED = "RunStarted"
RUN_FINISHED = "RunFinished"
PROMPT_OPENED = "PromptOpened"
PROMPT_RESOLVED = "PromptResolved"
SCHEDULE_PRUNED = "SchedulePruned"
EXPERIMENT_FINISHED = "ExperimentFinished"
TRIGGER_FIRED = "TriggerFired"


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: dict

    def to_obj(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}


class EventLog:
    """Append-only event sequence with optional file persistence and fan-out."""

    def __init__(self, path: Path | None = None):
        self.path = path
        self._events: list[Event] = []
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        if path is not None and path.exists():
            path.unlink()  # one stream per execution; replay reads a single run

    def emit(self, kind: str, payload: dict) -> Event:
        with self._lock:
            event = Event(len(self._events) + 1, kind, payload)
            self._events.append(event)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(canonical_json(event.to_obj()) + "\n")
            self._cond.notify_all()
        return event

    def since(self, seq: int) -> list[Event]:
        with self._lock:
            return [e for e in self._events if e.seq > seq]

    def wait_for(self, seq: int, timeout: float | None = None) -> list[Event]:
        """Block until an event with seq > *seq* exists; return the new tail."""
        with self._lock:
            self._cond.wait_for(lambda: len(self._events) > seq, timeout=timeout)
            return [e for e in self._events if e.seq > seq]

    @property
    def last_seq(self) -> int:
        with self._lock:
            return len(self._events)


class NullEventLog(EventLog):
    """Event sink that keeps nothing (for contexts with no observers)."""

    def emit(self, kind: str, payload: dict) -> Event:  # noqa: D102
        return Event(0, kind, payload)
