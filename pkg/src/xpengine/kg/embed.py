"""Knowledge-graph embeddings and link-prediction recommendations.

Entities and relations live in the same low-dimensional space; a triple
(h, r, t) scores `-||e_h + e_r - e_t||`, higher meaning more plausible.
Training minimizes a margin ranking loss between each stored triple and one
uniformly corrupted tail, with entity vectors renormalized each epoch.
Training is deterministic given (store contents, seed); the hot loop runs in
the compiled kernel when available (see `kernels`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyGraphError, NoContextError, UnknownEntityError
from .store import RELATIONS, Entity, EntityKind, KgStore
from . import kernels

DIM = 16
EPOCHS = 200
LEARNING_RATE = 0.05
MARGIN = 1.0


@dataclass
class EmbeddingTable:
    dim: int
    seed: int
    epochs: int
    margin: float
    learning_rate: float
    entity_index: dict[str, int] = field(default_factory=dict)
    relation_index: dict[str, int] = field(default_factory=dict)
    entity_vecs: np.ndarray = field(default_factory=lambda: np.zeros((0, DIM)))
    relation_vecs: np.ndarray = field(default_factory=lambda: np.zeros((0, DIM)))

    def entity_vec(self, entity: Entity) -> np.ndarray:
        idx = self.entity_index.get(entity.key)
        if idx is None:
            raise UnknownEntityError(entity.key)
        return self.entity_vecs[idx]

    def relation_vec(self, relation: str) -> np.ndarray:
        idx = self.relation_index.get(relation)
        if idx is None:
            raise UnknownEntityError(relation)
        return self.relation_vecs[idx]

    def has_entity(self, entity: Entity) -> bool:
        return entity.key in self.entity_index


def train_embeddings(
    store: KgStore,
    seed: int = 0,
    dim: int = DIM,
    epochs: int = EPOCHS,
    lr: float = LEARNING_RATE,
    margin: float = MARGIN,
) -> EmbeddingTable:
    """Train an embedding table over every entity and relation in the store."""
    if not store.triples:
        raise EmptyGraphError()

    entity_index = {e.key: i for i, e in enumerate(store.entities)}
    relation_names = sorted({t.relation for t in store.triples})
    relation_index = {name: i for i, name in enumerate(relation_names)}

    heads = np.array([entity_index[t.head.key] for t in store.triples], dtype=np.int64)
    rels = np.array([relation_index[t.relation] for t in store.triples], dtype=np.int64)
    tails = np.array([entity_index[t.tail.key] for t in store.triples], dtype=np.int64)

    n_entities = len(entity_index)
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(dim)
    ent = rng.uniform(-bound, bound, size=(n_entities, dim))
    rel = rng.uniform(-bound, bound, size=(len(relation_index), dim))

    # one uniformly corrupted tail per positive per epoch, never the true tail
    corrupt = np.empty((epochs, len(store.triples)), dtype=np.int64)
    for e in range(epochs):
        for i in range(len(store.triples)):
            c = int(rng.integers(n_entities))
            while c == tails[i]:
                c = int(rng.integers(n_entities))
            corrupt[e, i] = c

    ent = np.ascontiguousarray(ent)
    rel = np.ascontiguousarray(rel)
    kernels.train_sgd(ent, rel, heads, rels, tails, corrupt, lr, margin)

    return EmbeddingTable(
        dim=dim,
        seed=seed,
        epochs=epochs,
        margin=margin,
        learning_rate=lr,
        entity_index=entity_index,
        relation_index=relation_index,
        entity_vecs=ent,
        relation_vecs=rel,
    )


def score_triple(table: EmbeddingTable, head: Entity, relation: str, tail: Entity) -> float:
    """Translational plausibility score: `-||e_h + e_r - e_t||`, at most 0."""
    diff = table.entity_vec(head) + table.relation_vec(relation) - table.entity_vec(tail)
    return -float(np.linalg.norm(diff))


def score_vector(table: EmbeddingTable, head_vec: np.ndarray, relation: str, tail: Entity) -> float:
    diff = head_vec + table.relation_vec(relation) - table.entity_vec(tail)
    return -float(np.linalg.norm(diff))


def rank_tail(
    table: EmbeddingTable,
    head: Entity,
    relation: str,
    candidates: list[Entity],
    true_tail: Entity,
) -> int:
    """1-based rank of the true tail among candidates (ties resolved pessimistically)."""
    true_score = score_triple(table, head, relation, true_tail)
    rank = 1
    for cand in candidates:
        if cand == true_tail:
            continue
        if score_triple(table, head, relation, cand) >= true_score:
            rank += 1
    return rank


def recommend(
    table: EmbeddingTable,
    store: KgStore,
    context: dict[str, str],
    relation: str,
    k: int,
) -> list[tuple[Entity, float]]:
    """Rank candidate tails for a hypothetical new experiment.

    The new experiment has no vector of its own, so it borrows one: the mean
    of whichever context entities (user, dataset, intent) are already
    embedded. Candidates are every stored entity of the relation's tail kind,
    ranked by score, top-k (capped at the candidate count).
    """
    sig = RELATIONS.get(relation)
    if sig is None:
        raise ValueError(f"unknown relation '{relation}'")
    context_entities = []
    if context.get("user"):
        context_entities.append(Entity(EntityKind.USER, context["user"]))
    if context.get("dataset"):
        context_entities.append(Entity(EntityKind.DATASET, context["dataset"]))
    if context.get("intent"):
        context_entities.append(Entity(EntityKind.INTENT, context["intent"]))
    vecs = [table.entity_vec(e) for e in context_entities if table.has_entity(e)]
    if not vecs:
        raise NoContextError()
    head_vec = np.mean(np.vstack(vecs), axis=0)

    candidates = store.entities_of_kind(sig[1])
    scored = [(cand, score_vector(table, head_vec, relation, cand)) for cand in candidates]
    scored.sort(key=lambda pair: -pair[1])
    return scored[: max(0, min(k, len(scored)))]
