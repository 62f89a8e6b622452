"""Core domain model: workflows, variability points, configurations, CAWs.

A workflow template plus a set of variability points spans a finite space of
concrete analytics workflows (CAWs). The operations here expand that space
deterministically, resolve a configuration into a runnable CAW, and fingerprint
the result so that caching, redundancy detection, and lineage all agree on
identity.

Two identity levels exist on purpose:

* ``Caw.id`` — structural hash over the resolved workflow and the assignment.
  Stable across dataset changes; used to match history when planning
  re-executions on new data.
* ``fingerprint_caw`` — structural hash plus the content digests of every
  input dataset. Two runs share it only if they would compute the same thing
  on the same bytes; used for caching and exact-redundancy detection.

All types are immutable values after construction and safe to share across
threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .canonical import digest_obj
from .errors import EmptyDomainError, InvalidAssignmentError, MissingDigestError

Scalar = Union[int, float]
Value = Union[int, float, str]

DEFAULT_TIMEOUT_S = 3600


class TaskKind(str, Enum):
    AUTOMATED = "automated"
    MANUAL = "manual"


class VpKind(str, Enum):
    IMPLEMENTATION = "implementation"
    INPUT = "input"
    PARAMETER = "parameter"
    DEPLOYMENT = "deployment"


class Direction(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"
    INFORMATIONAL = "informational"


class ScopeKind(str, Enum):
    WORKFLOW = "workflow"
    TASK = "task"
    OUTPUT = "output"


class ConstraintOp(str, Enum):
    LE = "<="
    GE = ">="


@dataclass(frozen=True)
class TaskSpec:
    """One step of a workflow. Abstract iff automated with no impl command."""

    name: str
    kind: TaskKind = TaskKind.AUTOMATED
    impl: str | None = None
    params: dict[str, Scalar] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    timeout_s: int = DEFAULT_TIMEOUT_S

    @property
    def is_abstract(self) -> bool:
        return self.kind is TaskKind.AUTOMATED and self.impl is None


@dataclass(frozen=True)
class WorkflowSpec:
    tasks: tuple[TaskSpec, ...] = ()
    edges: tuple[tuple[str, str], ...] = ()

    def task_map(self) -> dict[str, TaskSpec]:
        return {t.name: t for t in self.tasks}

    def predecessors(self, name: str) -> list[str]:
        return [a for a, b in self.edges if b == name]

    def successors(self, name: str) -> list[str]:
        return [b for a, b in self.edges if a == name]


@dataclass(frozen=True)
class VariabilityPoint:
    """A declared axis of change over one target task.

    ``target_field`` is the parameter name for parameter points and the input
    name for input points; implementation and deployment points address the
    task as a whole.
    """

    name: str
    kind: VpKind
    task: str
    domain: tuple[Value, ...]
    target_field: str | None = None


@dataclass(frozen=True)
class Configuration:
    """A full assignment of variability points, plus its enumeration index."""

    assignment: dict[str, Value] = field(default_factory=dict)
    ordinal: int = 0


@dataclass(frozen=True)
class Caw:
    """Concrete analytics workflow: a template with every choice resolved."""

    id: str
    workflow: WorkflowSpec
    config: Configuration
    deployment_labels: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class MetricScope:
    kind: ScopeKind
    task: str | None = None


@dataclass(frozen=True)
class MetricSpec:
    name: str
    scope: MetricScope
    unit: str = ""
    direction: Direction = Direction.INFORMATIONAL


@dataclass(frozen=True)
class ConstraintSpec:
    metric: str
    op: ConstraintOp
    bound: Scalar
    hard: bool = True


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.subject}): {self.message}"


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, subject: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, subject, message))

    def extend(self, other: "ValidationReport") -> None:
        self.issues.extend(other.issues)

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]


# Builtin metrics every run reports regardless of the spec.
BUILTIN_METRICS = ("wall_s", "cpu_s", "peak_mem_mb", "interaction_min")


def _find_cycle(workflow: WorkflowSpec) -> list[str] | None:
    """Return one cycle as a node path (first node repeated at the end), or None."""
    adj: dict[str, list[str]] = {t.name: [] for t in workflow.tasks}
    for a, b in workflow.edges:
        if a in adj and b in adj:
            adj[a].append(b)
    color: dict[str, int] = {}  # 0 unvisited, 1 on stack, 2 done
    parent: dict[str, str] = {}

    for start in adj:
        if color.get(start):
            continue
        stack = [(start, iter(adj[start]))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                continue
            if color.get(nxt, 0) == 1:
                path = [nxt]
                cur = node
                while cur != nxt:
                    path.append(cur)
                    cur = parent[cur]
                path.append(nxt)
                path = path[::-1]
                return path
            if color.get(nxt, 0) == 0:
                color[nxt] = 1
                parent[nxt] = node
                stack.append((nxt, iter(adj[nxt])))
    return None


def topological_order(workflow: WorkflowSpec) -> list[str]:
    """Kahn's algorithm with declaration-order tie-breaking (deterministic)."""
    names = [t.name for t in workflow.tasks]
    indeg = {n: 0 for n in names}
    for a, b in workflow.edges:
        if b in indeg:
            indeg[b] += 1
    order: list[str] = []
    ready = [n for n in names if indeg[n] == 0]
    while ready:
        node = ready.pop(0)
        order.append(node)
        for succ in workflow.successors(node):
            indeg[succ] -= 1
            if indeg[succ] == 0:
                # keep declaration order among newly-ready nodes
                ready.append(succ)
                ready.sort(key=names.index)
    return order


def validate_workflow(workflow: WorkflowSpec, vps: list[VariabilityPoint] | tuple[VariabilityPoint, ...] = ()) -> ValidationReport:
    """Structural validation of a workflow template and its variability points."""
    report = ValidationReport()
    names = [t.name for t in workflow.tasks]
    seen: set[str] = set()
    for n in names:
        if n in seen:
            report.add("DuplicateTask", n, f"task '{n}' declared more than once")
        seen.add(n)
    tasks = workflow.task_map()

    for t in workflow.tasks:
        if t.kind is TaskKind.MANUAL and t.impl is not None:
            report.add("ManualTaskWithImpl", t.name, "manual tasks never carry an impl command")
        if t.timeout_s <= 0:
            report.add("InvalidTimeout", t.name, "timeout_s must be positive")

    for a, b in workflow.edges:
        for endpoint in (a, b):
            if endpoint not in tasks:
                report.add("DanglingReference", endpoint, f"edge endpoint '{endpoint}' is not a task")

    cycle = _find_cycle(workflow)
    if cycle is not None:
        report.add("CycleDetected", cycle[0], "cycle: " + " -> ".join(cycle))

    impl_targets: set[str] = set()
    vp_names: set[str] = set()
    for vp in vps:
        if vp.name in vp_names:
            report.add("DuplicateVp", vp.name, f"variability point '{vp.name}' declared more than once")
        vp_names.add(vp.name)
        if not vp.domain:
            report.add("EmptyDomain", vp.name, "domain must contain at least one value")
        if len(set(vp.domain)) != len(vp.domain):
            report.add("DuplicateDomainValue", vp.name, "domain values must be unique")
        task = tasks.get(vp.task)
        if task is None:
            report.add("DanglingReference", vp.task, f"vp '{vp.name}' targets unknown task '{vp.task}'")
            continue
        if vp.kind is VpKind.IMPLEMENTATION:
            if vp.task in impl_targets:
                report.add("DuplicateImplementationVp", vp.task, f"task '{vp.task}' has more than one implementation vp")
            impl_targets.add(vp.task)
            if task.kind is TaskKind.MANUAL:
                report.add("InvalidVpTarget", vp.name, "implementation vp cannot target a manual task")
        elif vp.kind is VpKind.PARAMETER:
            if vp.target_field not in task.params:
                report.add(
                    "DanglingReference",
                    f"{vp.task}.{vp.target_field}",
                    f"vp '{vp.name}' targets unknown parameter",
                )
        elif vp.kind is VpKind.INPUT:
            if vp.target_field not in task.inputs:
                report.add(
                    "DanglingReference",
                    f"{vp.task}.{vp.target_field}",
                    f"vp '{vp.name}' targets unknown input",
                )

    for t in workflow.tasks:
        if t.is_abstract and t.name not in impl_targets:
            report.add("UnresolvedAbstractTask", t.name, f"abstract task '{t.name}' has no implementation vp")

    return report


def expand_configurations(vps: list[VariabilityPoint] | tuple[VariabilityPoint, ...]) -> list[Configuration]:
    """Full Cartesian product in lexicographic order.

    Variability points iterate in declaration order, values in domain order;
    ordinals are positions in that enumeration. Zero points yield exactly one
    empty configuration.
    """
    for vp in vps:
        if not vp.domain:
            raise EmptyDomainError(vp.name)
    names = [vp.name for vp in vps]
    configs: list[Configuration] = []
    for ordinal, combo in enumerate(itertools.product(*(vp.domain for vp in vps))):
        configs.append(Configuration(dict(zip(names, combo)), ordinal))
    return configs


def space_size(vps: list[VariabilityPoint] | tuple[VariabilityPoint, ...]) -> int:
    n = 1
    for vp in vps:
        n *= len(vp.domain)
    return n


def instantiate_caw(
    workflow: WorkflowSpec,
    vps: list[VariabilityPoint] | tuple[VariabilityPoint, ...],
    config: Configuration,
) -> Caw:
    """Resolve a configuration into a concrete workflow.

    Implementation choices become task impls, parameter choices override
    defaults, input choices swap dataset references, deployment choices attach
    labels. Pure: identical arguments produce a structurally identical Caw.
    """
    by_name = {vp.name: vp for vp in vps}
    for name in config.assignment:
        if name not in by_name:
            raise InvalidAssignmentError(name, "no such variability point")
    tasks = {t.name: t for t in workflow.tasks}
    deployment: dict[str, str] = {}

    for vp in vps:
        if vp.name not in config.assignment:
            raise InvalidAssignmentError(vp.name, "unassigned variability point")
        value = config.assignment[vp.name]
        if value not in vp.domain:
            raise InvalidAssignmentError(vp.name, f"value {value!r} not in domain")
        task = tasks.get(vp.task)
        if task is None:
            raise InvalidAssignmentError(vp.name, f"target task '{vp.task}' missing")
        if vp.kind is VpKind.IMPLEMENTATION:
            tasks[vp.task] = replace(task, impl=str(value))
        elif vp.kind is VpKind.PARAMETER:
            params = dict(task.params)
            params[vp.target_field] = value
            tasks[vp.task] = replace(task, params=params)
        elif vp.kind is VpKind.INPUT:
            inputs = dict(task.inputs)
            inputs[vp.target_field] = str(value)
            tasks[vp.task] = replace(task, inputs=inputs)
        elif vp.kind is VpKind.DEPLOYMENT:
            deployment[vp.task] = str(value)

    resolved = WorkflowSpec(
        tasks=tuple(tasks[t.name] for t in workflow.tasks),
        edges=workflow.edges,
    )
    caw_id = digest_obj(
        {"workflow": workflow_obj(resolved), "assignment": config.assignment, "deployment": deployment}
    )
    return Caw(id=caw_id, workflow=resolved, config=config, deployment_labels=deployment)


def workflow_obj(workflow: WorkflowSpec) -> dict:
    """Plain-data form of a workflow for canonical hashing and export."""
    return {
        "tasks": [
            {
                "name": t.name,
                "kind": t.kind.value,
                "impl": t.impl,
                "params": t.params,
                "inputs": t.inputs,
                "timeout_s": t.timeout_s,
            }
            for t in workflow.tasks
        ],
        "edges": [[a, b] for a, b in workflow.edges],
    }


def workflow_hash(workflow: WorkflowSpec) -> str:
    """Structural digest of a workflow template (pre-resolution identity)."""
    return digest_obj(workflow_obj(workflow))


def input_refs(workflow: WorkflowSpec) -> set[str]:
    refs: set[str] = set()
    for t in workflow.tasks:
        refs.update(t.inputs.values())
    return refs


def fingerprint_caw(caw: Caw, input_digests: dict[str, str]) -> str:
    """Content fingerprint of a CAW together with its input data.

    Digests are keyed by dataset reference; only references actually used by
    the resolved workflow participate, so identical data reached through an
    unused extra digest does not perturb the fingerprint.
    """
    used = sorted(input_refs(caw.workflow))
    digests = {}
    for ref in used:
        if ref not in input_digests:
            raise MissingDigestError(ref)
        digests[ref] = input_digests[ref]
    return digest_obj(
        {
            "workflow": workflow_obj(caw.workflow),
            "assignment": caw.config.assignment,
            "deployment": caw.deployment_labels,
            "inputs": digests,
        }
    )
