"""Parsed experiment specification and source diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..interaction import InteractionPlan
from ..model import ConstraintSpec, MetricSpec, VariabilityPoint, WorkflowSpec
from ..monitor import MonitorSpec
from ..strategy import Intent, StrategySpec


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a single experiment declares, in source order."""

    name: str
    intent: Intent
    workflow: WorkflowSpec
    vps: tuple[VariabilityPoint, ...]
    strategy: StrategySpec
    metrics: tuple[MetricSpec, ...] = ()
    constraints: tuple[ConstraintSpec, ...] = ()
    interaction: InteractionPlan = field(default_factory=InteractionPlan)
    monitor: MonitorSpec | None = None


@dataclass(frozen=True)
class SourceError:
    line: int
    column: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"
