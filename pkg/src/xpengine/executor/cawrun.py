"""Whole-CAW execution: ordering, caching, metric resolution, verdicts.

Two cache levels cooperate here. A run whose full fingerprint (code +
parameters + input bytes) already exists in the knowledge repository is
returned as a reference to the prior record with ``cache_hit`` set and zero
processes spawned. Otherwise individual tasks may still be reused through the
task cache, whose key chains each task's command, parameters, input digests,
deployment label, and its parents' keys, so a task is only reused when its
entire upstream context is identical.
"""

from __future__ import annotations

import shutil
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from ..canonical import digest_obj
from ..model import (
    Caw,
    ConstraintSpec,
    MetricSpec,
    ScopeKind,
    TaskKind,
    TaskSpec,
    VariabilityPoint,
    VpKind,
    fingerprint_caw,
    topological_order,
)
from ..records import (
    CostRecord,
    RunRecord,
    RunStatus,
    TaskResult,
    TaskStatus,
    judge_constraints,
    sum_costs,
)
from ..storage import RunStore
from .taskrun import TaskManifest, run_task

ManualHandler = Callable[[TaskSpec, Caw, str], TaskResult]


@dataclass
class CawRunContext:
    """Everything run_caw needs beyond the CAW itself."""

    store: RunStore
    experiment: str
    workflow_hash: str
    resolve_ref: Callable[[str], Path]
    vps: tuple[VariabilityPoint, ...] = ()
    metric_specs: tuple[MetricSpec, ...] = ()
    constraints: tuple[ConstraintSpec, ...] = ()
    manual_handler: ManualHandler | None = None
    use_task_cache: bool = True
    stats: dict = field(default_factory=dict)


def task_cache_key(
    task: TaskSpec,
    input_digests: dict[str, str],
    deployment: str | None,
    parent_keys: list[str],
) -> str:
    return digest_obj(
        {
            "impl": task.impl,
            "params": task.params,
            "inputs": {name: input_digests[ref] for name, ref in task.inputs.items()},
            "deployment": deployment,
            "parents": sorted(parent_keys),
        }
    )


def resolve_metrics(
    metric_specs: tuple[MetricSpec, ...],
    results: dict[str, TaskResult],
    topo: list[str],
    builtins: dict[str, float],
) -> dict[str, float]:
    """Flatten per-task metrics into the run's metric map.

    Task- and output-scoped metrics read from their task's result. A
    workflow-scoped metric resolves to the builtin of the same name when one
    exists, otherwise to the last task (in topological order) that reported it.
    """
    resolved: dict[str, float] = dict(builtins)
    for spec in metric_specs:
        if spec.scope.kind is ScopeKind.WORKFLOW:
            if spec.name in builtins:
                continue
            for name in reversed(topo):
                value = results[name].metrics.get(spec.name)
                if value is not None:
                    resolved[spec.name] = value
                    break
        else:
            result = results.get(spec.scope.task or "")
            if result is not None and spec.name in result.metrics:
                resolved[spec.name] = result.metrics[spec.name]
    return resolved


def run_caw(caw: Caw, ctx: CawRunContext) -> RunRecord:
    """Execute every task of a CAW in dependency order and record the outcome.

    Downstream tasks of a failed (or timed-out) task are skipped, never run.
    Task errors become statuses; this function does not raise for them.
    """
    input_digests = {
        ref: ctx.store.digest_input(ref, ctx.resolve_ref(ref))
        for ref in sorted({r for t in caw.workflow.tasks for r in t.inputs.values()})
    }
    fingerprint = fingerprint_caw(caw, input_digests)
    prior = ctx.store.kg.runs_by_fingerprint(fingerprint)
    if prior:
        return prior[0].as_cache_hit()

    run_id = f"{ctx.experiment}-o{caw.config.ordinal:04d}-{fingerprint[:12]}"
    started = time.time()
    wall_start = time.perf_counter()

    tasks = caw.workflow.task_map()
    topo = topological_order(caw.workflow)
    results: dict[str, TaskResult] = {}
    keys: dict[str, str] = {}
    declared = {m.name for m in ctx.metric_specs}

    for name in topo:
        task = tasks[name]
        upstream_bad = any(
            results[p].status in (TaskStatus.FAILED, TaskStatus.TIMED_OUT, TaskStatus.SKIPPED)
            for p in caw.workflow.predecessors(name)
        )
        if upstream_bad:
            results[name] = TaskResult(task=name, status=TaskStatus.SKIPPED, error="upstream failure")
            continue

        if task.kind is TaskKind.MANUAL:
            if ctx.manual_handler is None:
                results[name] = TaskResult(
                    task=name, status=TaskStatus.SKIPPED, error="no interaction context"
                )
            else:
                results[name] = ctx.manual_handler(task, caw, run_id)
            continue

        key = task_cache_key(
            task,
            input_digests,
            caw.deployment_labels.get(name),
            [keys[p] for p in caw.workflow.predecessors(name)],
        )
        keys[name] = key
        cached = ctx.store.cached_task(key) if ctx.use_task_cache else None
        if cached is not None:
            # reuse metrics and artifacts at zero cost, but materialize the
            # artifacts here so downstream tasks can reach them through the
            # documented run layout
            results[name] = _materialize_cached(ctx, run_id, name, cached)
            continue

        task_dir = ctx.store.task_dir(ctx.experiment, run_id, name)
        manifest = TaskManifest(
            task=name,
            params=task.params,
            inputs={iname: str(ctx.resolve_ref(ref)) for iname, ref in task.inputs.items()},
            deployment=caw.deployment_labels.get(name),
            output_dir=str(task_dir),
        )
        result = run_task(task, manifest, task_dir, stats=ctx.stats)
        if result.status is TaskStatus.OK:
            prefix = ctx.store.relative(task_dir)
            result.outputs = {k: f"{prefix}/{v}" for k, v in result.outputs.items()}
            if declared:
                result.metrics = {
                    k: v for k, v in result.metrics.items() if k in declared or k in _BUILTIN_SET
                }
            result.cache_key = key
        results[name] = result

    wall_s = time.perf_counter() - wall_start
    task_costs = [results[name].cost for name in topo]
    total = sum_costs(task_costs)
    builtins = {
        "wall_s": wall_s,
        "cpu_s": total.cpu_s,
        "interaction_min": total.interaction_min,
    }
    if total.peak_mem_mb is not None:
        builtins["peak_mem_mb"] = total.peak_mem_mb
    metrics = resolve_metrics(ctx.metric_specs, results, topo, builtins)

    failed = any(
        results[name].status in (TaskStatus.FAILED, TaskStatus.TIMED_OUT) for name in topo
    )
    record = RunRecord(
        run_id=run_id,
        experiment=ctx.experiment,
        fingerprint=fingerprint,
        caw_id=caw.id,
        workflow_hash=ctx.workflow_hash,
        ordinal=caw.config.ordinal,
        assignment=dict(caw.config.assignment),
        impl_values={
            vp.name: str(caw.config.assignment[vp.name])
            for vp in ctx.vps
            if vp.kind is VpKind.IMPLEMENTATION
        },
        input_digests=input_digests,
        tasks=[results[name] for name in topo],
        metrics=metrics,
        verdicts=judge_constraints(ctx.constraints, metrics),
        cost=CostRecord(
            wall_s=wall_s,
            cpu_s=total.cpu_s,
            peak_mem_mb=total.peak_mem_mb,
            interaction_min=total.interaction_min,
        ),
        status=RunStatus.FAILED if failed else RunStatus.OK,
        cache_hit=False,
        started_at=started,
        finished_at=time.time(),
    )
    return record


def _materialize_cached(ctx: CawRunContext, run_id: str, name: str, cached: TaskResult) -> TaskResult:
    task_dir = ctx.store.task_dir(ctx.experiment, run_id, name)
    prefix = ctx.store.relative(task_dir)
    outputs: dict[str, str] = {}
    for oname, store_rel in cached.outputs.items():
        rel = "/".join(Path(store_rel).parts[4:]) or Path(store_rel).name
        src = ctx.store.root / store_rel
        dst = task_dir / rel
        if src.is_file() and not dst.exists():
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy2(src, dst)
        outputs[oname] = f"{prefix}/{rel}"
    return replace(cached, task=name, outputs=outputs, cost=CostRecord())


_BUILTIN_SET = {"wall_s", "cpu_s", "peak_mem_mb", "interaction_min"}
