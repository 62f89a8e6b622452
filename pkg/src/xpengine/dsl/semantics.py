"""Cross-reference checks that run after parsing."""

from __future__ import annotations

from ..model import BUILTIN_METRICS, ValidationReport, space_size, validate_workflow
from ..strategy import StrategyKind
from .ast import ExperimentSpec


def declared_metric_names(spec: ExperimentSpec) -> set[str]:
    """Metrics that may be referenced: declared ones plus builtins."""
    return {m.name for m in spec.metrics} | set(BUILTIN_METRICS)


def check_semantics(spec: ExperimentSpec) -> ValidationReport:
    """Aggregate structural workflow validation with spec-level rules."""
    report = validate_workflow(spec.workflow, list(spec.vps))
    tasks = spec.workflow.task_map()
    known_metrics = declared_metric_names(spec)

    if spec.intent.metric not in known_metrics:
        report.add("UndeclaredMetric", spec.intent.metric, "intent references an undeclared metric")

    seen_metrics: set[str] = set()
    for m in spec.metrics:
        if m.name in seen_metrics:
            report.add("DuplicateMetric", m.name, "metric declared more than once")
        seen_metrics.add(m.name)
        if m.scope.task is not None and m.scope.task not in tasks:
            report.add("DanglingReference", m.scope.task, f"metric '{m.name}' scopes an unknown task")

    for c in spec.constraints:
        if c.metric not in known_metrics:
            report.add("UndeclaredMetric", c.metric, "constraint references an undeclared metric")

    for i, point in enumerate(spec.interaction.checkpoints):
        if point.cost_min <= 0:
            report.add("NonPositiveCost", f"checkpoint[{i}]", "interaction cost must be positive")
        if point.after_k is not None and point.after_k < 1:
            report.add("InvalidCheckpoint", f"checkpoint[{i}]", "checkpoint period must be at least 1")
    if spec.interaction.budget_total_min < 0:
        report.add("NegativeBudget", "budget", "interaction budget must be nonnegative")

    s = spec.strategy
    if s.kind in (StrategyKind.RANDOM, StrategyKind.BAYESIAN):
        if s.n is None or s.n < 1:
            report.add("InvalidStrategy", s.kind.value, "strategy budget n must be at least 1")
        elif s.n > space_size(list(spec.vps)):
            report.add(
                "InvalidBudget",
                s.kind.value,
                f"budget n={s.n} exceeds the configuration space of {space_size(list(spec.vps))}",
            )
    if s.kind is StrategyKind.BAYESIAN:
        if s.init is None or s.init < 1 or (s.n is not None and s.init > s.n):
            report.add("InvalidStrategy", "bayesian", "init must satisfy 1 <= init <= n")

    if spec.monitor is not None:
        if spec.monitor.metric not in known_metrics:
            report.add("UndeclaredMetric", spec.monitor.metric, "monitor references an undeclared metric")
        if spec.monitor.window < 1:
            report.add("InvalidMonitor", "window", "window must be at least 1")
        if spec.monitor.min_new < 1:
            report.add("InvalidMonitor", "min_new", "min_new must be at least 1")

    return report
