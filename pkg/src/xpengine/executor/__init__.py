"""Experiment execution: tasks, CAWs, full experiments, cost planning, triggers."""

from ..monitor import MonitorSpec, TriggerDecision, TriggerReason, evaluate_retraining_trigger
from .cawrun import CawRunContext, run_caw, task_cache_key
from .cost import ConfigEstimate, CostEstimate, estimate_experiment_cost
from .experiment import (
    EngineOptions,
    ExperimentReport,
    ExperimentRunner,
    ReexecutionPlan,
    ReportStatus,
    ScriptResponder,
    plan_reexecution,
    run_experiment,
)
from .taskrun import TaskManifest, processes_spawned, run_task

__all__ = [
    "CawRunContext",
    "ConfigEstimate",
    "CostEstimate",
    "EngineOptions",
    "ExperimentReport",
    "ExperimentRunner",
    "MonitorSpec",
    "ReexecutionPlan",
    "ReportStatus",
    "ScriptResponder",
    "TaskManifest",
    "TriggerDecision",
    "TriggerReason",
    "estimate_experiment_cost",
    "evaluate_retraining_trigger",
    "plan_reexecution",
    "processes_spawned",
    "run_caw",
    "run_experiment",
    "run_task",
    "task_cache_key",
]
