"""End-to-end experiment execution.

The runner expands the configuration space, applies knowledge-based pruning,
obtains a schedule from the strategy (all of it up front for grid/random, one
candidate at a time for Bayesian), executes CAWs through the cache, records
every fresh run into the knowledge repository, and fires interaction
checkpoints where supervisors can steer the pending schedule or abort.

History-based pruning deliberately skips configurations whose exact
fingerprint is already cached: rerunning those costs nothing, so pruning them
would only lose information. Pruning therefore bites exactly when data has
changed (structural history exists, fingerprints miss), which is the
re-execution scenario it exists for.
"""

from __future__ import annotations

from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from ..dsl.ast import ExperimentSpec
from ..dsl.semantics import check_semantics
from ..errors import EngineError, SpecInvalidError
from ..events import (
    EXPERIMENT_FINISHED,
    PROMPT_OPENED,
    PROMPT_RESOLVED,
    RUN_FINISHED,
    RUN_STARTED,
    SCHEDULE_PRUNED,
    EventLog,
    NullEventLog,
)
from ..interaction import (
    DEFAULT_MANUAL_COST_MIN,
    AutoAnswer,
    InteractionBudget,
    InteractionPoint,
    Involve,
    Prompt,
    Role,
    SupervisorAction,
    SupervisorResponse,
    ValidatorResponse,
    apply_response,
    decide_involvement,
)
from ..kg.graph import ingest_run, intent_metric_history, record_feedback
from ..model import (
    Caw,
    Configuration,
    Direction,
    TaskSpec,
    VpKind,
    expand_configurations,
    fingerprint_caw,
    instantiate_caw,
    workflow_hash,
)
from ..records import CostRecord, RunRecord, RunStatus, TaskResult, TaskStatus, sum_costs
from ..storage import RunStore
from ..strategy import (
    StrategyKind,
    SurrogateState,
    encode_config,
    next_candidate_bo,
    plan_static,
    prune_known_poor,
    sample_init,
    translate_intent,
)
from .cawrun import CawRunContext, run_caw

SPEC_DIR_VAR = "${SPEC_DIR}"


def expand_spec_dir(spec: ExperimentSpec, base_dir: Path) -> ExperimentSpec:
    """Substitute ${SPEC_DIR} in commands and dataset references.

    Expansion happens before fingerprinting so identity follows the commands
    and files that actually run, not the template text.
    """
    base = str(base_dir)

    def sub(value):
        return value.replace(SPEC_DIR_VAR, base) if isinstance(value, str) else value

    tasks = tuple(
        replace(
            t,
            impl=sub(t.impl) if t.impl else t.impl,
            inputs={k: sub(v) for k, v in t.inputs.items()},
        )
        for t in spec.workflow.tasks
    )
    vps = tuple(
        replace(vp, domain=tuple(sub(v) for v in vp.domain))
        if vp.kind in (VpKind.IMPLEMENTATION, VpKind.INPUT)
        else vp
        for vp in spec.vps
    )
    return replace(spec, workflow=replace(spec.workflow, tasks=tasks), vps=vps)


class ReportStatus(str, Enum):
    COMPLETED = "completed"
    ABORTED_BY_USER = "aborted_by_user"
    NO_FEASIBLE_CONFIGURATION = "no_feasible_configuration"


@dataclass
class EngineOptions:
    user: str = "default"
    workers: int = 1
    seed: int | None = None  # overrides the strategy's seed when set
    base_dir: Path | None = None  # resolves ${SPEC_DIR} and relative input refs


class ScriptResponder:
    """Headless stand-in for the UI: answers consumed strictly in order.

    Supervisor items look like ``{"action": "prune", "ordinals": [5, 6]}``;
    validator items like ``{"valid": true, "note": "ok"}``. An exhausted
    script leaves prompts unanswered, which the engine treats as a skip.
    """

    def __init__(self, items: list[dict]):
        self.items = list(items)
        self.pos = 0

    def respond(self, prompt: Prompt):
        if self.pos >= len(self.items):
            return None
        item = self.items[self.pos]
        self.pos += 1
        if prompt.role is Role.SUPERVISOR:
            action = SupervisorAction(item.get("action", "continue"))
            return SupervisorResponse(action, tuple(item.get("ordinals", ())))
        if "valid" not in item:
            raise ValueError(f"scripted answer {self.pos} does not fit a validator prompt: {item}")
        return ValidatorResponse(bool(item["valid"]), str(item.get("note", "")))


@dataclass
class ExperimentReport:
    experiment: str
    status: ReportStatus
    results: list[RunRecord] = field(default_factory=list)
    best: dict | None = None
    totals: CostRecord = field(default_factory=CostRecord)
    planned: int = 0
    pruned_by_history: list[int] = field(default_factory=list)
    pruned_by_user: list[int] = field(default_factory=list)
    budget_total_min: float = 0.0
    budget_used_min: float = 0.0
    interaction_log: list[dict] = field(default_factory=list)
    processes_spawned: int = 0

    @property
    def involvements(self) -> int:
        return sum(1 for entry in self.interaction_log if entry["decision"] == "involve")

    def to_obj(self) -> dict:
        return {
            "experiment": self.experiment,
            "status": self.status.value,
            "results": [
                {
                    "ordinal": r.ordinal,
                    "run_id": r.run_id,
                    "status": r.status.value,
                    "cache_hit": r.cache_hit,
                    "feasible": r.feasible,
                    "metrics": r.metrics,
                }
                for r in self.results
            ],
            "best": self.best,
            "totals": self.totals.to_obj(),
            "planned": self.planned,
            "pruned_by_history": self.pruned_by_history,
            "pruned_by_user": self.pruned_by_user,
            "budget": {"total_min": self.budget_total_min, "used_min": self.budget_used_min},
            "interaction_log": self.interaction_log,
            "processes_spawned": self.processes_spawned,
        }


class ExperimentRunner:
    def __init__(
        self,
        spec: ExperimentSpec,
        store: RunStore,
        responder=None,
        events: EventLog | None = None,
        options: EngineOptions | None = None,
    ):
        issues = check_semantics(spec)
        if not issues.ok:
            raise SpecInvalidError(issues.issues)
        self.store = store
        self.responder = responder
        self.events = events if events is not None else NullEventLog()
        self.options = options or EngineOptions()
        self.base_dir = Path(self.options.base_dir or Path.cwd()).resolve()
        self.spec = expand_spec_dir(spec, self.base_dir)
        spec = self.spec

        self.configs = expand_configurations(spec.vps)
        strategy = spec.strategy
        if self.options.seed is not None:
            strategy = replace(strategy, seed=self.options.seed)
        self.strategy = translate_intent(spec.intent, strategy, len(self.configs))
        self.wf_hash = workflow_hash(spec.workflow)
        self._caws: dict[int, Caw] = {}

        self.budget = InteractionBudget(total_min=spec.interaction.budget_total_min)
        self.profile = store.load_profile(self.options.user)
        self.results: list[RunRecord] = []
        self.pruned_by_user: list[int] = []
        self.pruned_by_history: list[int] = []
        self.aborted = False
        self.pending: list[Configuration] = []
        self.interaction_log: list[dict] = []
        self.stats: dict = {"spawned": 0}
        self._prompt_seq = 0
        self._bo_forced: list[Configuration] = []

    # ------------------------------------------------------------ resolution

    def resolve_ref(self, ref: str) -> Path:
        expanded = ref.replace(SPEC_DIR_VAR, str(self.base_dir))
        path = Path(expanded)
        if not path.is_absolute():
            path = self.base_dir / path
        return path

    def caw_for(self, config: Configuration) -> Caw:
        caw = self._caws.get(config.ordinal)
        if caw is None:
            caw = instantiate_caw(self.spec.workflow, self.spec.vps, config)
            self._caws[config.ordinal] = caw
        return caw

    # ------------------------------------------------------------- main loop

    def run(self) -> ExperimentReport:
        history = intent_metric_history(self.store.kg, self.spec.intent.metric, self.wf_hash)
        allowed = self._prune_by_history(history)

        if self.strategy.kind is StrategyKind.BAYESIAN:
            self._run_bayesian(allowed)
        else:
            schedule = plan_static(self.strategy, allowed)
            self._run_static(schedule)
        return self._finish(len(allowed))

    def _prune_by_history(self, history: dict[str, float]) -> list[Configuration]:
        if not history:
            return list(self.configs)
        prunable = []
        for config in self.configs:
            caw = self.caw_for(config)
            if caw.id in history and not self._is_cached(config):
                prunable.append(config)
        _, pruned = prune_known_poor(
            prunable,
            lambda c: self.caw_for(c).id,
            history,
            self.spec.intent.direction,
            q=0.5,
        )
        pruned_set = {c.ordinal for c in pruned}
        if pruned_set:
            self.pruned_by_history = sorted(pruned_set)
            self.events.emit(
                SCHEDULE_PRUNED, {"by": "history", "ordinals": self.pruned_by_history}
            )
        return [c for c in self.configs if c.ordinal not in pruned_set]

    def _is_cached(self, config: Configuration) -> bool:
        caw = self.caw_for(config)
        try:
            digests = {
                ref: self.store.digest_input(ref, self.resolve_ref(ref))
                for t in caw.workflow.tasks
                for ref in t.inputs.values()
            }
        except EngineError:
            return False
        return bool(self.store.kg.runs_by_fingerprint(fingerprint_caw(caw, digests)))

    # -------------------------------------------------------------- schedules

    def _run_static(self, schedule: list[Configuration]) -> None:
        self.pending = list(schedule)
        completed = 0
        if self.options.workers <= 1:
            while self.pending and not self.aborted:
                config = self.pending.pop(0)
                if config.ordinal in set(self.pruned_by_user):
                    continue
                self._execute(config)
                completed += 1
                self._checkpoints(completed)
            return
        with ThreadPoolExecutor(max_workers=self.options.workers) as pool:
            in_flight: dict = {}
            while (self.pending or in_flight) and not self.aborted:
                while self.pending and len(in_flight) < self.options.workers:
                    config = self.pending.pop(0)
                    if config.ordinal in set(self.pruned_by_user):
                        continue
                    self.events.emit(RUN_STARTED, self._start_payload(config))
                    in_flight[pool.submit(self._run_only, config)] = config
                if not in_flight:
                    break
                done, _ = wait(in_flight, return_when=FIRST_COMPLETED)
                for future in done:
                    config = in_flight.pop(future)
                    self._record(config, future.result())
                    completed += 1
                    self._checkpoints(completed)

    def _run_bayesian(self, allowed: list[Configuration]) -> None:
        n = min(self.strategy.n or len(allowed), len(allowed))
        remaining = list(allowed)
        surrogate = SurrogateState(direction=self.spec.intent.direction)
        evaluated = 0

        for config in sample_init(self.strategy, remaining):
            if self.aborted or evaluated >= n:
                return
            remaining = [c for c in remaining if c.ordinal != config.ordinal]
            if config.ordinal in set(self.pruned_by_user):
                continue
            record = self._execute(config)
            self._observe(surrogate, config, record)
            evaluated += 1
            self._checkpoints(evaluated)

        while evaluated < n and remaining and not self.aborted:
            remaining = [c for c in remaining if c.ordinal not in set(self.pruned_by_user)]
            if not remaining:
                break
            if self._bo_forced:
                config = self._bo_forced.pop(0)
                if config.ordinal not in {c.ordinal for c in remaining}:
                    continue
            else:
                config = next_candidate_bo(surrogate, remaining, self.spec.vps, self.strategy.xi)
            remaining = [c for c in remaining if c.ordinal != config.ordinal]
            record = self._execute(config)
            self._observe(surrogate, config, record)
            evaluated += 1
            self._checkpoints(evaluated)

    def _observe(self, surrogate: SurrogateState, config: Configuration, record: RunRecord) -> None:
        value = record.metrics.get(self.spec.intent.metric)
        if record.status is not RunStatus.OK or value is None:
            value = self._failure_penalty(surrogate)
        surrogate.observe(encode_config(self.spec.vps, config), float(value))

    def _failure_penalty(self, surrogate: SurrogateState) -> float:
        # keep the surrogate away from failing regions without blowing up scaling
        if not surrogate.y:
            return -1000.0 if self.spec.intent.direction is Direction.MAXIMIZE else 1000.0
        span = max(surrogate.y) - min(surrogate.y)
        pad = max(1.0, span)
        if self.spec.intent.direction is Direction.MAXIMIZE:
            return min(surrogate.y) - pad
        return max(surrogate.y) + pad

    # -------------------------------------------------------------- execution

    def _start_payload(self, config: Configuration) -> dict:
        return {"ordinal": config.ordinal, "assignment": config.assignment}

    def _run_only(self, config: Configuration) -> RunRecord:
        ctx = CawRunContext(
            store=self.store,
            experiment=self.spec.name,
            workflow_hash=self.wf_hash,
            resolve_ref=self.resolve_ref,
            vps=self.spec.vps,
            metric_specs=self.spec.metrics,
            constraints=self.spec.constraints,
            manual_handler=self._manual_handler,
            stats=self.stats,
        )
        return run_caw(self.caw_for(config), ctx)

    def _execute(self, config: Configuration) -> RunRecord:
        self.events.emit(RUN_STARTED, self._start_payload(config))
        record = self._run_only(config)
        self._record(config, record)
        return record

    def _record(self, config: Configuration, record: RunRecord) -> None:
        if not record.cache_hit:
            self.store.record_run(record)
            ingest_run(self.store.kg, record, self.spec, self.options.user)
        self.results.append(record)
        self.events.emit(
            RUN_FINISHED,
            {
                "ordinal": config.ordinal,
                "assignment": config.assignment,
                "run_id": record.run_id,
                "status": record.status.value,
                "cache_hit": record.cache_hit,
                "feasible": record.feasible,
                "metrics": record.metrics,
                "cost": record.cost.to_obj(),
            },
        )

    # ------------------------------------------------------------ interaction

    def _next_prompt_id(self) -> str:
        self._prompt_seq += 1
        return f"{self.spec.name}-p{self._prompt_seq}"

    def _checkpoints(self, completed: int) -> None:
        for point in self.spec.interaction.checkpoints:
            if self.aborted or point.after_k is None or completed % point.after_k != 0:
                continue
            category = f"{self.wf_hash[:12]}:checkpoint:{point.role.value}"
            decision = decide_involvement(point, self.budget, self.profile, category)
            if isinstance(decision, AutoAnswer):
                prompt_id = self._next_prompt_id()
                self.events.emit(
                    PROMPT_OPENED,
                    {"prompt_id": prompt_id, "role": point.role.value, "payload": {"auto": True}},
                )
                self._log_interaction("auto", point, charged=0.0, answer=decision.answer)
                self.events.emit(
                    PROMPT_RESOLVED,
                    {
                        "prompt_id": prompt_id,
                        "outcome": "auto",
                        "answer": decision.answer,
                        "confidence": decision.confidence,
                        **self._budget_payload(),
                    },
                )
                continue
            if isinstance(decision, Involve):
                self._supervise(point, category, completed)
            else:
                self._log_interaction("skip", point, charged=0.0)

    def _overview_payload(self, completed: int) -> dict:
        metric = self.spec.intent.metric
        return {
            "completed": completed,
            "results": [
                {
                    "ordinal": r.ordinal,
                    "status": r.status.value,
                    "feasible": r.feasible,
                    "metric": r.metrics.get(metric),
                }
                for r in self.results
            ],
            "pending": self._pending_ordinals(),
            "intent_metric": metric,
        }

    def _pending_ordinals(self) -> list[int]:
        if self.strategy.kind is StrategyKind.BAYESIAN:
            evaluated = {r.ordinal for r in self.results}
            pruned = set(self.pruned_by_user) | set(self.pruned_by_history)
            return [c.ordinal for c in self.configs if c.ordinal not in evaluated and c.ordinal not in pruned]
        return [c.ordinal for c in self.pending if c.ordinal not in set(self.pruned_by_user)]

    def _supervise(self, point: InteractionPoint, category: str, completed: int) -> None:
        prompt = Prompt(
            id=self._next_prompt_id(),
            role=point.role,
            category=category,
            cost_min=point.cost_min,
            payload=self._overview_payload(completed),
        )
        self.events.emit(
            PROMPT_OPENED,
            {
                "prompt_id": prompt.id,
                "role": prompt.role.value,
                "cost_min": prompt.cost_min,
                "payload": prompt.payload,
            },
        )
        response = self.responder.respond(prompt) if self.responder is not None else None
        if response is None:
            # nobody answered: skip semantics, supervisor default is continue
            self._log_interaction("unanswered", point, charged=0.0)
            self.events.emit(
                PROMPT_RESOLVED,
                {"prompt_id": prompt.id, "outcome": "unanswered", **self._budget_payload()},
            )
            return
        try:
            self.budget, delta = apply_response(
                self.budget,
                self.profile,
                prompt,
                response,
                set(self._pending_ordinals()),
            )
        except Exception as exc:
            self._log_interaction("rejected", point, charged=0.0, error=str(exc))
            self.events.emit(
                PROMPT_RESOLVED,
                {"prompt_id": prompt.id, "outcome": "rejected", "error": str(exc), **self._budget_payload()},
            )
            return
        self._log_interaction("involve", point, charged=point.cost_min)
        if isinstance(response, ValidatorResponse):
            if self.results:
                record_feedback(self.store.kg, self.options.user, self.results[-1].run_id)
            self.store.save_profile(self.profile)
            self.events.emit(
                PROMPT_RESOLVED,
                {
                    "prompt_id": prompt.id,
                    "outcome": "involved",
                    "valid": response.valid,
                    **self._budget_payload(),
                },
            )
            return
        action = response.action.value
        if delta.abort:
            self.aborted = True
        if delta.prune_ordinals:
            self.pruned_by_user.extend(sorted(delta.prune_ordinals))
            self.events.emit(
                SCHEDULE_PRUNED, {"by": "supervisor", "ordinals": sorted(delta.prune_ordinals)}
            )
        if delta.prioritize_ordinals:
            self._prioritize(delta.prioritize_ordinals)
        self.events.emit(
            PROMPT_RESOLVED,
            {"prompt_id": prompt.id, "outcome": "involved", "action": action, **self._budget_payload()},
        )

    def _prioritize(self, ordinals: tuple[int, ...]) -> None:
        if self.strategy.kind is StrategyKind.BAYESIAN:
            by_ordinal = {c.ordinal: c for c in self.configs}
            self._bo_forced.extend(by_ordinal[o] for o in ordinals if o in by_ordinal)
            return
        chosen = [c for o in ordinals for c in self.pending if c.ordinal == o]
        rest = [c for c in self.pending if c.ordinal not in set(ordinals)]
        self.pending = chosen + rest

    def _budget_payload(self) -> dict:
        return {
            "budget_used_min": self.budget.used_min,
            "budget_total_min": self.budget.total_min,
        }

    def _log_interaction(self, decision: str, point: InteractionPoint, charged: float, **extra) -> None:
        entry = {
            "decision": decision,
            "role": point.role.value,
            "cost_min": point.cost_min,
            "charged_min": charged,
            "used_min": self.budget.used_min,
        }
        entry.update(extra)
        self.interaction_log.append(entry)

    def _manual_handler(self, task: TaskSpec, caw: Caw, run_id: str) -> TaskResult:
        cost = float(task.params.get("cost_min", DEFAULT_MANUAL_COST_MIN))
        point = InteractionPoint(role=Role.VALIDATOR, cost_min=cost, manual_task=task.name)
        category = f"{self.wf_hash[:12]}:{task.name}:valid_output"
        decision = decide_involvement(point, self.budget, self.profile, category)

        if isinstance(decision, AutoAnswer):
            prompt_id = self._next_prompt_id()
            self.events.emit(
                PROMPT_OPENED,
                {"prompt_id": prompt_id, "role": "validator", "payload": {"task": task.name, "auto": True}},
            )
            self._log_interaction("auto", point, charged=0.0, answer=decision.answer, task=task.name)
            self.events.emit(
                PROMPT_RESOLVED,
                {
                    "prompt_id": prompt_id,
                    "outcome": "auto",
                    "answer": decision.answer,
                    "confidence": decision.confidence,
                    **self._budget_payload(),
                },
            )
            valid = decision.answer == "yes"
            return TaskResult(
                task=task.name,
                status=TaskStatus.OK,
                metrics={"user_valid": 1.0 if valid else 0.0},
                cost=CostRecord(),
            )

        if isinstance(decision, Involve):
            prompt = Prompt(
                id=self._next_prompt_id(),
                role=Role.VALIDATOR,
                category=category,
                cost_min=cost,
                payload={
                    "task": task.name,
                    "run_id": run_id,
                    "assignment": caw.config.assignment,
                    "question": "Is this output valid?",
                },
            )
            self.events.emit(
                PROMPT_OPENED,
                {
                    "prompt_id": prompt.id,
                    "role": "validator",
                    "cost_min": cost,
                    "payload": prompt.payload,
                },
            )
            response = self.responder.respond(prompt) if self.responder is not None else None
            if response is None:
                self._log_interaction("unanswered", point, charged=0.0, task=task.name)
                self.events.emit(
                    PROMPT_RESOLVED,
                    {"prompt_id": prompt.id, "outcome": "unanswered", **self._budget_payload()},
                )
                return TaskResult(task=task.name, status=TaskStatus.OK, cost=CostRecord())
            self.budget, _ = apply_response(self.budget, self.profile, prompt, response, set())
            record_feedback(self.store.kg, self.options.user, run_id)
            self.store.save_profile(self.profile)
            self._log_interaction("involve", point, charged=cost, task=task.name)
            self.events.emit(
                PROMPT_RESOLVED,
                {
                    "prompt_id": prompt.id,
                    "outcome": "involved",
                    "valid": response.valid,
                    **self._budget_payload(),
                },
            )
            return TaskResult(
                task=task.name,
                status=TaskStatus.OK,
                metrics={"user_valid": 1.0 if response.valid else 0.0},
                cost=CostRecord(interaction_min=cost),
            )

        # skipped: the answer stays unknown; skipping consumes nothing
        self._log_interaction("skip", point, charged=0.0, task=task.name)
        return TaskResult(task=task.name, status=TaskStatus.OK, cost=CostRecord())

    # ---------------------------------------------------------------- finish

    def _finish(self, planned: int) -> ExperimentReport:
        metric = self.spec.intent.metric
        contenders = [
            r for r in self.results if r.status is RunStatus.OK and r.feasible and metric in r.metrics
        ]
        best = None
        if contenders:
            pick = (
                max(contenders, key=lambda r: r.metrics[metric])
                if self.spec.intent.direction is Direction.MAXIMIZE
                else min(contenders, key=lambda r: r.metrics[metric])
            )
            best = {
                "ordinal": pick.ordinal,
                "run_id": pick.run_id,
                "assignment": pick.assignment,
                "metric": metric,
                "value": pick.metrics[metric],
            }
        if self.aborted:
            status = ReportStatus.ABORTED_BY_USER
        elif best is None:
            status = ReportStatus.NO_FEASIBLE_CONFIGURATION
        else:
            status = ReportStatus.COMPLETED

        fresh_costs = [r.cost for r in self.results if not r.cache_hit]
        totals = sum_costs(fresh_costs)
        totals = CostRecord(
            wall_s=totals.wall_s,
            cpu_s=totals.cpu_s,
            peak_mem_mb=totals.peak_mem_mb,
            interaction_min=self.budget.used_min,
        )
        report = ExperimentReport(
            experiment=self.spec.name,
            status=status,
            results=self.results,
            best=best,
            totals=totals,
            planned=planned,
            pruned_by_history=self.pruned_by_history,
            pruned_by_user=sorted(set(self.pruned_by_user)),
            budget_total_min=self.budget.total_min,
            budget_used_min=self.budget.used_min,
            interaction_log=self.interaction_log,
            processes_spawned=self.stats.get("spawned", 0),
        )
        self.store.write_report(self.spec.name, report.to_obj())
        self.store.write_export(self.spec.name, self.results)
        self.store.kg.save_snapshot()
        self.store.save_profile(self.profile)
        self.events.emit(
            EXPERIMENT_FINISHED,
            {
                "status": status.value,
                "best": best,
                "totals": totals.to_obj(),
                "runs": len(self.results),
                **self._budget_payload(),
            },
        )
        return report


def run_experiment(
    spec: ExperimentSpec,
    store: RunStore,
    responder=None,
    events: EventLog | None = None,
    options: EngineOptions | None = None,
) -> ExperimentReport:
    """Run one experiment to completion against a store. See ExperimentRunner."""
    runner = ExperimentRunner(spec, store, responder=responder, events=events, options=options)
    return runner.run()


@dataclass(frozen=True)
class ReexecutionPlan:
    kept: list[int]
    pruned: list[int]


def plan_reexecution(
    spec: ExperimentSpec, store: RunStore, q: float = 0.5, base_dir: Path | None = None
) -> ReexecutionPlan:
    """Original schedule minus configurations whose history says they are poor.

    Works on structural CAW ids only, so no input files are touched: the plan
    is valid even when the re-execution will run on new data.
    """
    spec = expand_spec_dir(spec, Path(base_dir or Path.cwd()))
    configs = expand_configurations(spec.vps)
    caw_ids = {c.ordinal: instantiate_caw(spec.workflow, spec.vps, c).id for c in configs}
    history = intent_metric_history(store.kg, spec.intent.metric, workflow_hash(spec.workflow))
    kept, pruned = prune_known_poor(
        configs, lambda c: caw_ids[c.ordinal], history, spec.intent.direction, q=q
    )
    return ReexecutionPlan([c.ordinal for c in kept], [c.ordinal for c in pruned])
