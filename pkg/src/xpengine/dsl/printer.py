"""Canonical re-emission of experiment specs.

The layout is fixed (one declaration per line, two-space indent, one edge per
line, empty optional sections omitted), so any two structurally equal specs
print to identical text and `parse(canonical_form(s))` equals `s`.
"""

from __future__ import annotations

from ..interaction import InteractionPlan
from ..model import ScopeKind, TaskKind, VpKind
from ..strategy import StrategyKind
from .ast import ExperimentSpec

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _quote(s: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(c, c) for c in s) + '"'


def _scalar(v) -> str:
    if isinstance(v, bool):
        raise TypeError("booleans are not scalars in this language")
    return repr(v) if isinstance(v, float) else str(v)


def _value(v) -> str:
    return _quote(v) if isinstance(v, str) else _scalar(v)


def canonical_form(spec: ExperimentSpec) -> str:
    out: list[str] = [f"experiment {spec.name} {{"]
    out.append(f"  intent {spec.intent.direction.value} {spec.intent.metric};")

    out.append("  workflow {")
    for t in spec.workflow.tasks:
        if t.kind is TaskKind.MANUAL:
            head = f"task {t.name} manual"
        elif t.impl is None:
            head = f"task {t.name} abstract"
        else:
            head = f"task {t.name} impl {_quote(t.impl)}"
        if t.params:
            head += " params (" + ", ".join(f"{k} = {_scalar(v)}" for k, v in t.params.items()) + ")"
        if t.inputs:
            head += " inputs (" + ", ".join(f"{k} = {_quote(v)}" for k, v in t.inputs.items()) + ")"
        out.append(f"    {head};")
    for a, b in spec.workflow.edges:
        out.append(f"    {a} -> {b};")
    out.append("  }")

    out.append("  variability {")
    for vp in spec.vps:
        if vp.kind is VpKind.IMPLEMENTATION:
            target = f"impl({vp.task})"
        elif vp.kind is VpKind.PARAMETER:
            target = f"param({vp.task}.{vp.target_field})"
        elif vp.kind is VpKind.INPUT:
            target = f"input({vp.task}.{vp.target_field})"
        else:
            target = f"deploy({vp.task})"
        domain = ", ".join(_value(v) for v in vp.domain)
        out.append(f"    vp {vp.name}: {target} in {{{domain}}};")
    out.append("  }")

    s = spec.strategy
    if s.kind is StrategyKind.GRID:
        out.append("  strategy grid;")
    elif s.kind is StrategyKind.RANDOM:
        out.append(f"  strategy random(n = {s.n}, seed = {s.seed});")
    else:
        out.append(f"  strategy bayesian(n = {s.n}, init = {s.init}, seed = {s.seed});")

    if spec.metrics:
        out.append("  metrics {")
        for m in spec.metrics:
            if m.scope.kind is ScopeKind.WORKFLOW:
                scope = "workflow"
            elif m.scope.kind is ScopeKind.TASK:
                scope = f"task({m.scope.task})"
            else:
                scope = f"output({m.scope.task})"
            unit = f" {_quote(m.unit)}" if m.unit else ""
            out.append(f"    metric {m.name} {scope}{unit};")
        out.append("  }")

    if spec.constraints:
        out.append("  constraints {")
        for c in spec.constraints:
            soft = "" if c.hard else " soft"
            out.append(f"    metric {c.metric} {c.op.value} {_scalar(c.bound)}{soft};")
        out.append("  }")

    if spec.interaction != InteractionPlan():
        out.append("  interaction {")
        for p in spec.interaction.checkpoints:
            out.append(
                f"    checkpoint after {p.after_k} configurations role {p.role.value} "
                f"cost {_scalar(p.cost_min)} min;"
            )
        out.append(f"    budget {_scalar(spec.interaction.budget_total_min)} min;")
        out.append("  }")

    if spec.monitor is not None:
        m = spec.monitor
        out.append("  monitor {")
        out.append(
            f"    metric {m.metric} threshold {_scalar(m.threshold)} "
            f"window {m.window} min_new {m.min_new};"
        )
        out.append("  }")

    out.append("}")
    return "\n".join(out) + "\n"
