"""Command-line interface.

Exit codes: 0 success, 1 invalid spec, 2 runtime failure, 3 no feasible
configuration.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .dsl import check_semantics, parse_experiment
from .errors import EngineError
from .executor import (
    EngineOptions,
    ReportStatus,
    ScriptResponder,
    estimate_experiment_cost,
    run_experiment,
)
from .kg.embed import recommend as kg_recommend
from .kg.embed import train_embeddings
from .kg.graph import lineage as kg_lineage
from .storage import RunStore

EXIT_OK = 0
EXIT_INVALID_SPEC = 1
EXIT_RUNTIME = 2
EXIT_NO_FEASIBLE = 3


def _load_spec(path: str):
    source = Path(path).read_text(encoding="utf-8")
    parsed = parse_experiment(source)
    if isinstance(parsed, list):
        for err in parsed:
            click.echo(f"{path}:{err}", err=True)
        sys.exit(EXIT_INVALID_SPEC)
    issues = check_semantics(parsed)
    if not issues.ok:
        for issue in issues.issues:
            click.echo(f"{path}: {issue}", err=True)
        sys.exit(EXIT_INVALID_SPEC)
    return parsed


@click.group()
def main() -> None:
    """Experiment-driven analytics workflows."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def validate(file: str) -> None:
    """Parse and semantically check an experiment file."""
    spec = _load_spec(file)
    click.echo(
        f"ok: experiment '{spec.name}' with {len(spec.workflow.tasks)} tasks, "
        f"{len(spec.vps)} variability points, strategy {spec.strategy.kind.value}"
    )


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--store", "store_dir", default="xp_store", show_default=True, help="Store directory.")
@click.option("--answers", type=click.Path(exists=True, dir_okay=False), help="Scripted responses (JSON list).")
@click.option("--seed", type=int, default=None, help="Override the strategy seed.")
@click.option("--workers", type=int, default=1, show_default=True, help="Concurrent CAW workers.")
@click.option("--user", default="default", show_default=True, help="Acting user id.")
def run(file: str, store_dir: str, answers: str | None, seed: int | None, workers: int, user: str) -> None:
    """Run an experiment to completion (headless)."""
    spec = _load_spec(file)
    store = RunStore(store_dir)
    responder = None
    if answers:
        responder = ScriptResponder(json.loads(Path(answers).read_text(encoding="utf-8")))
    options = EngineOptions(
        user=user, workers=workers, seed=seed, base_dir=Path(file).resolve().parent
    )
    try:
        report = run_experiment(
            spec,
            store,
            responder=responder,
            events=store.event_log(spec.name),
            options=options,
        )
    except EngineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    click.echo(f"experiment {spec.name}: {report.status.value}")
    click.echo(
        f"  runs: {len(report.results)} (planned {report.planned}, "
        f"pruned by history {len(report.pruned_by_history)}, by user {len(report.pruned_by_user)})"
    )
    if report.best:
        click.echo(
            f"  best: ordinal {report.best['ordinal']} -> "
            f"{report.best['metric']}={report.best['value']}"
        )
    totals = report.totals
    click.echo(
        f"  cost: wall {totals.wall_s:.2f}s, cpu {totals.cpu_s:.2f}s, "
        f"interaction {totals.interaction_min:.1f}min"
    )
    click.echo(f"  report: {store.root / 'runs' / spec.name / 'report.json'}")
    if report.status is ReportStatus.NO_FEASIBLE_CONFIGURATION:
        sys.exit(EXIT_NO_FEASIBLE)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--store", "store_dir", default="xp_store", show_default=True)
def estimate(file: str, store_dir: str) -> None:
    """Estimate experiment cost from recorded history."""
    spec = _load_spec(file)
    store = RunStore(store_dir)
    est = estimate_experiment_cost(spec, store, base_dir=Path(file).resolve().parent)
    if est.total is None:
        click.echo(f"total: unknown ({est.scheduled} configurations, no history)")
    else:
        click.echo(
            f"total: wall {est.total.wall_s:.2f}s, cpu {est.total.cpu_s:.2f}s "
            f"over {est.scheduled} configurations ({est.unknown_count} unknown)"
        )
    for row in est.per_config:
        cost = f"{row.cost.wall_s:.2f}s ({row.basis})" if row.cost else "unknown"
        click.echo(f"  ordinal {row.ordinal}: {cost}")


@main.command()
@click.option("--store", "store_dir", default="xp_store", show_default=True)
@click.option("--user", default="")
@click.option("--dataset", default="")
@click.option("--intent", default="")
@click.option("--relation", default="usesAlgorithm", show_default=True)
@click.option("-k", "top_k", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def recommend(store_dir: str, user: str, dataset: str, intent: str, relation: str, top_k: int, seed: int) -> None:
    """Recommend entities for a new experiment from the knowledge repository."""
    store = RunStore(store_dir)
    try:
        table = train_embeddings(store.kg, seed=seed)
        ranked = kg_recommend(
            table, store.kg, {"user": user, "dataset": dataset, "intent": intent}, relation, top_k
        )
    except EngineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    for entity, score in ranked:
        click.echo(f"{entity.kind.value}\t{entity.id}\t{score:.4f}")


@main.command()
@click.option("--store", "store_dir", default="xp_store", show_default=True)
@click.option("--experiment", default=None)
@click.option("--dataset", default=None)
@click.option("--fingerprint", default=None)
def lineage(store_dir: str, experiment: str | None, dataset: str | None, fingerprint: str | None) -> None:
    """List run records by experiment, dataset digest, or CAW fingerprint."""
    store = RunStore(store_dir)
    try:
        records = kg_lineage(store.kg, experiment=experiment, dataset=dataset, fingerprint=fingerprint)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    for r in records:
        click.echo(
            f"{r.run_id}\t{r.experiment}\tord={r.ordinal}\t{r.status.value}"
            f"\t{json.dumps(r.metrics, sort_keys=True)}"
        )


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_dir", default="xp_store", show_default=True)
@click.option("--ui", "ui_dir", default=None, help="Directory of built dashboard assets to serve at /ui.")
@click.option(
    "--base-dir",
    default=None,
    help="Directory that ${SPEC_DIR} and relative dataset refs resolve against (default: cwd).",
)
def serve(port: int, host: str, store_dir: str, ui_dir: str | None, base_dir: str | None) -> None:
    """Serve the HTTP API (and optionally the dashboard)."""
    import uvicorn

    from .service import EngineService, create_app

    service = EngineService(store_dir, base_dir=base_dir)
    app = create_app(service, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
