"""Experiment cost planning from recorded history.

Per-configuration estimates fall through three tiers: mean cost of past runs
that share both the workflow template and this configuration's implementation
choices; mean over all past runs of the workflow template; unknown. Unknown
is a value here, never zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dsl.ast import ExperimentSpec
from ..model import Configuration, VpKind, expand_configurations, workflow_hash
from ..records import CostRecord, mean_costs
from ..storage import RunStore
from ..strategy import StrategyKind, plan_static
from .experiment import expand_spec_dir


@dataclass(frozen=True)
class ConfigEstimate:
    ordinal: int
    assignment: dict
    cost: CostRecord | None  # None = unknown
    basis: str  # "implementation" | "workflow" | "unknown"

    def to_obj(self) -> dict:
        return {
            "ordinal": self.ordinal,
            "assignment": self.assignment,
            "cost": self.cost.to_obj() if self.cost else None,
            "basis": self.basis,
        }


@dataclass
class CostEstimate:
    per_config: list[ConfigEstimate] = field(default_factory=list)
    total: CostRecord | None = None
    scheduled: int = 0
    unknown_count: int = 0

    def to_obj(self) -> dict:
        return {
            "per_config": [c.to_obj() for c in self.per_config],
            "total": self.total.to_obj() if self.total else None,
            "scheduled": self.scheduled,
            "unknown_count": self.unknown_count,
        }


def _impl_values(spec: ExperimentSpec, config: Configuration) -> dict[str, str]:
    return {
        vp.name: str(config.assignment[vp.name])
        for vp in spec.vps
        if vp.kind is VpKind.IMPLEMENTATION
    }


def estimate_experiment_cost(
    spec: ExperimentSpec, store: RunStore, base_dir: "Path | None" = None
) -> CostEstimate:
    """Estimate the cost of running *spec* given what the repository knows."""
    from pathlib import Path

    spec = expand_spec_dir(spec, Path(base_dir or Path.cwd()))
    wf_hash = workflow_hash(spec.workflow)
    runs = [r for r in store.kg.run_records() if r.workflow_hash == wf_hash]
    configs = expand_configurations(spec.vps)

    estimates: dict[int, ConfigEstimate] = {}
    for config in configs:
        impl = _impl_values(spec, config)
        tier1 = [r.cost for r in runs if r.impl_values == impl]
        if tier1:
            estimates[config.ordinal] = ConfigEstimate(
                config.ordinal, config.assignment, mean_costs(tier1), "implementation"
            )
            continue
        tier2 = [r.cost for r in runs]
        if tier2:
            estimates[config.ordinal] = ConfigEstimate(
                config.ordinal, config.assignment, mean_costs(tier2), "workflow"
            )
            continue
        estimates[config.ordinal] = ConfigEstimate(config.ordinal, config.assignment, None, "unknown")

    if spec.strategy.kind is StrategyKind.BAYESIAN:
        # the dynamic schedule is unknown up front: budget n at the mean known estimate
        scheduled = min(spec.strategy.n or len(configs), len(configs))
        rows = [estimates[c.ordinal] for c in configs]
        known = [e.cost for e in rows if e.cost is not None]
        mean = mean_costs(known) if known else None
        total = (
            CostRecord(
                wall_s=mean.wall_s * scheduled,
                cpu_s=mean.cpu_s * scheduled,
                peak_mem_mb=mean.peak_mem_mb,
                interaction_min=mean.interaction_min * scheduled,
            )
            if mean
            else None
        )
        return CostEstimate(rows, total, scheduled, sum(1 for e in rows if e.cost is None))

    schedule = plan_static(spec.strategy, configs)
    rows = [estimates[c.ordinal] for c in schedule]
    known = [e.cost for e in rows if e.cost is not None]
    total = None
    if known:
        total = CostRecord(
            wall_s=sum(c.wall_s for c in known),
            cpu_s=sum(c.cpu_s for c in known),
            peak_mem_mb=max((c.peak_mem_mb for c in known if c.peak_mem_mb is not None), default=None),
            interaction_min=sum(c.interaction_min for c in known),
        )
    return CostEstimate(rows, total, len(rows), sum(1 for e in rows if e.cost is None))
