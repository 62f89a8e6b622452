"""Engine service: experiment lifecycle, prompt brokering, monitoring.

One service owns one store. Experiments run on background threads; every
mutation funnels through the owning runner, and all observable state flows
out through per-experiment event logs. Prompts opened by a running experiment
block that experiment until a response arrives (or the service is asked to
skip them); responses arrive through `resolve_prompt`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..dsl import ExperimentSpec, check_semantics, parse_experiment
from ..errors import StaleResponseError
from ..events import TRIGGER_FIRED, EventLog
from ..executor.experiment import (
    EngineOptions,
    ExperimentReport,
    ExperimentRunner,
    plan_reexecution,
)
from ..interaction import Prompt, Role, SupervisorAction, SupervisorResponse, ValidatorResponse
from ..kg.embed import EmbeddingTable, train_embeddings
from ..model import Direction
from ..monitor import evaluate_retraining_trigger
from ..storage import RunStore


def parse_response(role: Role, body: dict):
    """Decode a wire response for a prompt of the given role."""
    if role is Role.SUPERVISOR:
        action = SupervisorAction(body.get("action", "continue"))
        return SupervisorResponse(action, tuple(int(o) for o in body.get("ordinals", ())))
    if "valid" not in body:
        raise ValueError("validator response requires a 'valid' field")
    return ValidatorResponse(bool(body["valid"]), str(body.get("note", "")))


@dataclass
class _PendingPrompt:
    prompt: Prompt
    event: threading.Event = field(default_factory=threading.Event)
    response: object | None = None


class PromptBroker:
    """Bridges engine threads (which block on prompts) and HTTP handlers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pending: dict[str, _PendingPrompt] = {}
        self._resolved: set[str] = set()

    def respond(self, prompt: Prompt):
        entry = _PendingPrompt(prompt)
        with self._lock:
            self._pending[prompt.id] = entry
        entry.event.wait()
        with self._lock:
            self._pending.pop(prompt.id, None)
            self._resolved.add(prompt.id)
        return entry.response

    def pending(self) -> list[Prompt]:
        with self._lock:
            return [e.prompt for e in self._pending.values()]

    def get(self, prompt_id: str) -> Prompt | None:
        with self._lock:
            entry = self._pending.get(prompt_id)
            return entry.prompt if entry else None

    def is_resolved(self, prompt_id: str) -> bool:
        with self._lock:
            return prompt_id in self._resolved

    def resolve(self, prompt_id: str, response) -> None:
        with self._lock:
            entry = self._pending.get(prompt_id)
            if entry is None:
                if prompt_id in self._resolved:
                    raise StaleResponseError(prompt_id)
                raise KeyError(prompt_id)
            entry.response = response
        entry.event.set()

    def release_all(self) -> None:
        """Unblock every pending prompt with no answer (shutdown path)."""
        with self._lock:
            entries = list(self._pending.values())
        for entry in entries:
            entry.event.set()


@dataclass
class ExperimentHandle:
    spec: ExperimentSpec
    events: EventLog
    broker: PromptBroker
    status: str = "running"  # running | completed | aborted_by_user | no_feasible_configuration | error
    report: ExperimentReport | None = None
    error: str = ""
    thread: threading.Thread | None = None
    runner: ExperimentRunner | None = None
    production_stream: list[float] = field(default_factory=list)
    new_data_count: int = 0
    retrain_count: int = 0


class EngineService:
    def __init__(self, store_dir: str | Path, base_dir: str | Path | None = None, user: str = "default"):
        self.store = RunStore(store_dir)
        self.base_dir = Path(base_dir).resolve() if base_dir else Path.cwd()
        self.user = user
        self._lock = threading.Lock()
        self.experiments: dict[str, ExperimentHandle] = {}
        self._embed_cache: tuple[int, EmbeddingTable] | None = None

    # ------------------------------------------------------------ lifecycle

    def submit(self, source: str, seed: int | None = None, workers: int = 1) -> tuple[str | None, list]:
        """Parse, check, and start an experiment. Returns (id, errors)."""
        parsed = parse_experiment(source)
        if isinstance(parsed, list):
            return None, [{"line": e.line, "column": e.column, "code": e.code, "message": e.message} for e in parsed]
        issues = check_semantics(parsed)
        if not issues.ok:
            return None, [
                {"line": 0, "column": 0, "code": i.code, "message": f"{i.subject}: {i.message}"}
                for i in issues.issues
            ]
        self._start(parsed, seed=seed, workers=workers)
        return parsed.name, []

    def _start(
        self,
        spec: ExperimentSpec,
        seed: int | None = None,
        workers: int = 1,
        restrict_ordinals: set[int] | None = None,
    ) -> ExperimentHandle:
        handle = ExperimentHandle(
            spec=spec,
            events=self.store.event_log(spec.name),
            broker=PromptBroker(),
        )
        options = EngineOptions(user=self.user, workers=workers, seed=seed, base_dir=self.base_dir)

        def run() -> None:
            try:
                runner = ExperimentRunner(
                    spec, self.store, responder=handle.broker, events=handle.events, options=options
                )
                if restrict_ordinals is not None:
                    runner.configs = [c for c in runner.configs if c.ordinal in restrict_ordinals]
                handle.runner = runner
                report = runner.run()
                handle.report = report
                handle.status = report.status.value
            except Exception as exc:  # surfaced through GET, never kills the service
                handle.status = "error"
                handle.error = str(exc)

        handle.thread = threading.Thread(target=run, name=f"experiment-{spec.name}", daemon=True)
        with self._lock:
            if spec.name in self.experiments:
                raise FileExistsError(spec.name)
            self.experiments[spec.name] = handle
        handle.thread.start()
        return handle

    def get(self, experiment: str) -> ExperimentHandle | None:
        with self._lock:
            return self.experiments.get(experiment)

    def list(self) -> list[ExperimentHandle]:
        with self._lock:
            return list(self.experiments.values())

    def wait(self, experiment: str, timeout: float | None = None) -> ExperimentHandle:
        handle = self.get(experiment)
        if handle is None:
            raise KeyError(experiment)
        if handle.thread is not None:
            handle.thread.join(timeout)
        return handle

    # -------------------------------------------------------------- prompts

    def find_prompt(self, prompt_id: str) -> tuple[ExperimentHandle, Prompt] | None:
        for handle in self.list():
            prompt = handle.broker.get(prompt_id)
            if prompt is not None:
                return handle, prompt
        return None

    def prompt_resolved(self, prompt_id: str) -> bool:
        return any(handle.broker.is_resolved(prompt_id) for handle in self.list())

    def resolve_prompt(self, prompt_id: str, body: dict) -> None:
        """Route a wire response to the prompt's experiment.

        Raises KeyError (unknown), StaleResponseError (already resolved),
        ValueError (malformed body or prune/prioritize of non-pending
        configurations).
        """
        found = self.find_prompt(prompt_id)
        if found is None:
            if self.prompt_resolved(prompt_id):
                raise StaleResponseError(prompt_id)
            raise KeyError(prompt_id)
        handle, prompt = found
        response = parse_response(prompt.role, body)
        if isinstance(response, SupervisorResponse) and response.action in (
            SupervisorAction.PRUNE,
            SupervisorAction.PRIORITIZE,
        ):
            runner = handle.runner
            pending = set(runner._pending_ordinals()) if runner is not None else set()
            unknown = [o for o in response.ordinals if o not in pending]
            if unknown:
                from ..errors import UnknownConfigError

                raise UnknownConfigError(unknown)
        handle.broker.resolve(prompt_id, response)

    # ----------------------------------------------------------- monitoring

    def _monitor_direction(self, spec: ExperimentSpec) -> Direction:
        assert spec.monitor is not None
        if spec.monitor.metric == spec.intent.metric:
            return spec.intent.direction
        for m in spec.metrics:
            if m.name == spec.monitor.metric and m.direction is not Direction.INFORMATIONAL:
                return m.direction
        return Direction.MAXIMIZE

    def ingest_production_metric(self, experiment: str, metric: str, value: float) -> dict:
        """Append a production observation; may fire a re-execution trigger."""
        handle = self.get(experiment)
        if handle is None:
            raise KeyError(experiment)
        spec = handle.spec
        if spec.monitor is None or spec.monitor.metric != metric:
            raise ValueError(f"metric '{metric}' is not monitored for '{experiment}'")
        handle.production_stream.append(float(value))
        handle.new_data_count += 1
        decision = evaluate_retraining_trigger(
            spec.monitor,
            handle.production_stream,
            handle.new_data_count,
            self._monitor_direction(spec),
        )
        if not decision.fired:
            return {"trigger": None, "stream_len": len(handle.production_stream)}

        plan = plan_reexecution(spec, self.store, base_dir=self.base_dir)
        handle.retrain_count += 1
        handle.production_stream.clear()
        handle.new_data_count = 0
        retrain_name = f"{experiment}-retrain-{handle.retrain_count}"
        retrain_spec = replace(spec, name=retrain_name)
        self._start(retrain_spec, restrict_ordinals=set(plan.kept))
        handle.events.emit(
            TRIGGER_FIRED,
            {
                "reason": decision.reason.value,
                "experiment": retrain_name,
                "scheduled": sorted(plan.kept),
                "pruned": sorted(plan.pruned),
            },
        )
        return {
            "trigger": decision.reason.value,
            "experiment": retrain_name,
            "scheduled": sorted(plan.kept),
            "pruned": sorted(plan.pruned),
        }

    # -------------------------------------------------------- recommendations

    def embeddings(self, seed: int = 0) -> EmbeddingTable:
        """Embedding table over the current graph, cached per log position."""
        key = self.store.kg.seq
        if self._embed_cache is not None and self._embed_cache[0] == key:
            return self._embed_cache[1]
        table = train_embeddings(self.store.kg, seed=seed)
        self._embed_cache = (key, table)
        return table
