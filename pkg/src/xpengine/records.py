"""Run records: the unit of institutional memory.

A RunRecord captures one executed CAW: per-task results, resolved workflow
metrics, constraint verdicts, cost, and the identities (structural CAW id and
data-inclusive fingerprint) that caching, redundancy detection, pruning, and
lineage key on. Records serialize to plain dicts so the knowledge repository
can log and replay them canonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .model import ConstraintOp, ConstraintSpec, Scalar


class TaskStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"
    TIMED_OUT = "timed_out"
    SKIPPED = "skipped"


class RunStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass(frozen=True)
class CostRecord:
    wall_s: float = 0.0
    cpu_s: float = 0.0
    peak_mem_mb: float | None = None  # None = unknown, never coerced to 0
    interaction_min: float = 0.0

    def to_obj(self) -> dict:
        return {
            "wall_s": self.wall_s,
            "cpu_s": self.cpu_s,
            "peak_mem_mb": self.peak_mem_mb,
            "interaction_min": self.interaction_min,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "CostRecord":
        return cls(
            wall_s=obj.get("wall_s", 0.0),
            cpu_s=obj.get("cpu_s", 0.0),
            peak_mem_mb=obj.get("peak_mem_mb"),
            interaction_min=obj.get("interaction_min", 0.0),
        )


def sum_costs(costs: list[CostRecord]) -> CostRecord:
    """Aggregate: times add up, peak memory is a maximum over known values."""
    peaks = [c.peak_mem_mb for c in costs if c.peak_mem_mb is not None]
    return CostRecord(
        wall_s=sum(c.wall_s for c in costs),
        cpu_s=sum(c.cpu_s for c in costs),
        peak_mem_mb=max(peaks) if peaks else None,
        interaction_min=sum(c.interaction_min for c in costs),
    )


def mean_costs(costs: list[CostRecord]) -> CostRecord | None:
    if not costs:
        return None
    n = len(costs)
    peaks = [c.peak_mem_mb for c in costs if c.peak_mem_mb is not None]
    return CostRecord(
        wall_s=sum(c.wall_s for c in costs) / n,
        cpu_s=sum(c.cpu_s for c in costs) / n,
        peak_mem_mb=sum(peaks) / len(peaks) if peaks else None,
        interaction_min=sum(c.interaction_min for c in costs) / n,
    )


@dataclass
class TaskResult:
    task: str
    status: TaskStatus
    outputs: dict[str, str] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    cost: CostRecord = field(default_factory=CostRecord)
    error: str = ""
    cache_key: str = ""

    def to_obj(self) -> dict:
        return {
            "task": self.task,
            "status": self.status.value,
            "outputs": self.outputs,
            "metrics": self.metrics,
            "cost": self.cost.to_obj(),
            "error": self.error,
            "cache_key": self.cache_key,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "TaskResult":
        return cls(
            task=obj["task"],
            status=TaskStatus(obj["status"]),
            outputs=dict(obj.get("outputs", {})),
            metrics=dict(obj.get("metrics", {})),
            cost=CostRecord.from_obj(obj.get("cost", {})),
            error=obj.get("error", ""),
            cache_key=obj.get("cache_key", ""),
        )


@dataclass(frozen=True)
class ConstraintVerdict:
    metric: str
    op: ConstraintOp
    bound: Scalar
    hard: bool
    passed: bool

    def to_obj(self) -> dict:
        return {
            "metric": self.metric,
            "op": self.op.value,
            "bound": self.bound,
            "hard": self.hard,
            "passed": self.passed,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ConstraintVerdict":
        return cls(obj["metric"], ConstraintOp(obj["op"]), obj["bound"], obj["hard"], obj["passed"])


def judge_constraints(
    constraints: list[ConstraintSpec] | tuple[ConstraintSpec, ...],
    metrics: dict[str, float],
) -> list[ConstraintVerdict]:
    """Evaluate every constraint; a missing metric value counts as violated."""
    verdicts = []
    for c in constraints:
        value = metrics.get(c.metric)
        if value is None:
            passed = False
        elif c.op is ConstraintOp.LE:
            passed = value <= c.bound
        else:
            passed = value >= c.bound
        verdicts.append(ConstraintVerdict(c.metric, c.op, c.bound, c.hard, passed))
    return verdicts


def hard_feasible(verdicts: list[ConstraintVerdict]) -> bool:
    return all(v.passed for v in verdicts if v.hard)


@dataclass
class RunRecord:
    run_id: str
    experiment: str
    fingerprint: str
    caw_id: str
    workflow_hash: str
    ordinal: int
    assignment: dict
    impl_values: dict[str, str] = field(default_factory=dict)
    input_digests: dict[str, str] = field(default_factory=dict)
    tasks: list[TaskResult] = field(default_factory=list)
    metrics: dict[str, float] = field(default_factory=dict)
    verdicts: list[ConstraintVerdict] = field(default_factory=list)
    cost: CostRecord = field(default_factory=CostRecord)
    status: RunStatus = RunStatus.OK
    cache_hit: bool = False
    started_at: float = 0.0
    finished_at: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status is RunStatus.OK and hard_feasible(self.verdicts)

    def as_cache_hit(self) -> "RunRecord":
        return replace(self, cache_hit=True)

    def to_obj(self) -> dict:
        return {
            "run_id": self.run_id,
            "experiment": self.experiment,
            "fingerprint": self.fingerprint,
            "caw_id": self.caw_id,
            "workflow_hash": self.workflow_hash,
            "ordinal": self.ordinal,
            "assignment": self.assignment,
            "impl_values": self.impl_values,
            "input_digests": self.input_digests,
            "tasks": [t.to_obj() for t in self.tasks],
            "metrics": self.metrics,
            "verdicts": [v.to_obj() for v in self.verdicts],
            "cost": self.cost.to_obj(),
            "status": self.status.value,
            "cache_hit": self.cache_hit,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "RunRecord":
        return cls(
            run_id=obj["run_id"],
            experiment=obj["experiment"],
            fingerprint=obj["fingerprint"],
            caw_id=obj["caw_id"],
            workflow_hash=obj["workflow_hash"],
            ordinal=obj["ordinal"],
            assignment=dict(obj.get("assignment", {})),
            impl_values=dict(obj.get("impl_values", {})),
            input_digests=dict(obj.get("input_digests", {})),
            tasks=[TaskResult.from_obj(t) for t in obj.get("tasks", [])],
            metrics=dict(obj.get("metrics", {})),
            verdicts=[ConstraintVerdict.from_obj(v) for v in obj.get("verdicts", [])],
            cost=CostRecord.from_obj(obj.get("cost", {})),
            status=RunStatus(obj.get("status", "ok")),
            cache_hit=obj.get("cache_hit", False),
            started_at=obj.get("started_at", 0.0),
            finished_at=obj.get("finished_at", 0.0),
        )
