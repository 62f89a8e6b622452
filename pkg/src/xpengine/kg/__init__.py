"""Knowledge repository: typed graph, persistence, embeddings, recommendations."""

from .embed import EmbeddingTable, rank_tail, recommend, score_triple, train_embeddings
from .graph import (
    NOT_REDUNDANT,
    Redundancy,
    detect_redundant,
    ingest_run,
    intent_metric_history,
    lineage,
    record_feedback,
)
from .store import RELATIONS, Entity, EntityKind, KgStore, Triple

__all__ = [
    "EmbeddingTable",
    "Entity",
    "EntityKind",
    "KgStore",
    "NOT_REDUNDANT",
    "RELATIONS",
    "Redundancy",
    "Triple",
    "detect_redundant",
    "ingest_run",
    "intent_metric_history",
    "lineage",
    "rank_tail",
    "recommend",
    "record_feedback",
    "score_triple",
    "train_embeddings",
]
