"""Graph construction from run records, redundancy checks, lineage queries."""

from __future__ import annotations

from dataclasses import dataclass

from ..dsl.ast import ExperimentSpec
from ..records import RunRecord
from .store import Entity, EntityKind, KgStore, Triple


def intent_entity_id(spec: ExperimentSpec) -> str:
    return f"{spec.intent.direction.value}-{spec.intent.metric}"


def ingest_run(store: KgStore, record: RunRecord, spec: ExperimentSpec, user: str) -> list[Triple]:
    """Fold one executed run into the graph.

    Creates or reuses the experiment, run, user, intent, dataset, algorithm
    and metric entities and links them. Idempotent per run id: re-ingesting a
    stored run returns an empty triple set and writes nothing.
    """
    if not store.add_run(record):
        return []

    experiment = store.add_entity(EntityKind.EXPERIMENT, record.experiment)
    run = store.add_entity(EntityKind.RUN, record.run_id)
    user_e = store.add_entity(EntityKind.USER, user)
    intent = store.add_entity(EntityKind.INTENT, intent_entity_id(spec))

    new: list[Triple] = []

    def link(head: Entity, relation: str, tail: Entity, attrs: dict | None = None) -> None:
        triple = store.add_triple(head, relation, tail, attrs)
        if triple is not None:
            new.append(triple)

    link(experiment, "ranBy", user_e)
    link(experiment, "hasIntent", intent)
    link(experiment, "producedRun", run)
    link(run, "partOfExperiment", experiment)

    for value in record.impl_values.values():
        algorithm = store.add_entity(EntityKind.ALGORITHM, str(value))
        link(run, "usesAlgorithm", algorithm)

    for digest in sorted(set(record.input_digests.values())):
        dataset = store.add_entity(EntityKind.DATASET, digest)
        link(run, "usesDataset", dataset)

    declared = {m.name for m in spec.metrics}
    for name in sorted(record.metrics):
        if name not in declared:
            continue
        metric = store.add_entity(EntityKind.METRIC, name)
        link(run, "achievedMetric", metric, {"value": float(record.metrics[name])})

    return new


def record_feedback(store: KgStore, user: str, run_id: str) -> Triple | None:
    """Link a validator's feedback on a run into the graph."""
    user_e = store.add_entity(EntityKind.USER, user)
    run_e = store.add_entity(EntityKind.RUN, run_id)
    return store.add_triple(user_e, "gaveFeedback", run_e)


@dataclass(frozen=True)
class Redundancy:
    redundant: bool
    run_id: str | None = None

    def __bool__(self) -> bool:
        return self.redundant


NOT_REDUNDANT = Redundancy(False)


def detect_redundant(fingerprint: str, store: KgStore) -> Redundancy:
    """Exact-fingerprint match against stored runs (same code, same data)."""
    matches = store.runs_by_fingerprint(fingerprint)
    if matches:
        return Redundancy(True, matches[0].run_id)
    return NOT_REDUNDANT


def lineage(
    store: KgStore,
    experiment: str | None = None,
    dataset: str | None = None,
    fingerprint: str | None = None,
) -> list[RunRecord]:
    """Exact run sets by experiment name, dataset content digest, or fingerprint."""
    given = [v for v in (experiment, dataset, fingerprint) if v is not None]
    if len(given) != 1:
        raise ValueError("lineage takes exactly one of experiment/dataset/fingerprint")
    if experiment is not None:
        return store.runs_by_experiment(experiment)
    if dataset is not None:
        return store.runs_by_dataset(dataset)
    return store.runs_by_fingerprint(fingerprint)


def intent_metric_history(store: KgStore, metric: str, workflow_hash: str) -> dict[str, float]:
    """Mean intent-metric value per structural CAW id, for pruning decisions.

    Keyed by the data-independent CAW id so that history gathered on old data
    still prunes when the experiment re-runs on new data.
    """
    sums: dict[str, list[float]] = {}
    for record in store.run_records():
        if record.workflow_hash != workflow_hash:
            continue
        value = record.metrics.get(metric)
        if value is None:
            continue
        sums.setdefault(record.caw_id, []).append(float(value))
    return {caw_id: sum(vs) / len(vs) for caw_id, vs in sums.items()}
