"""Benchmark: compiled vs pure embedding-training kernel.

Usage: python benchmarks/bench_embeddings.py [--entities N] [--triples T] [--epochs E]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from xpengine.kg import kernels
from xpengine.kg._sgd_py import train_sgd as train_pure


def make_problem(n_entities: int, n_triples: int, epochs: int, dim: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    ent = np.ascontiguousarray(rng.uniform(-0.6, 0.6, (n_entities, dim)))
    rel = np.ascontiguousarray(rng.uniform(-0.6, 0.6, (8, dim)))
    heads = rng.integers(n_entities, size=n_triples)
    rels = rng.integers(8, size=n_triples)
    tails = rng.integers(n_entities, size=n_triples)
    corrupt = rng.integers(n_entities, size=(epochs, n_triples))
    return ent, rel, heads, rels, tails, corrupt


def bench(fn, problem) -> float:
    ent, rel, heads, rels, tails, corrupt = problem
    start = time.perf_counter()
    fn(ent.copy(), rel.copy(), heads, rels, tails, corrupt, 0.05, 1.0)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--entities", type=int, default=400)
    parser.add_argument("--triples", type=int, default=2000)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--dim", type=int, default=16)
    args = parser.parse_args()

    problem = make_problem(args.entities, args.triples, args.epochs, args.dim)
    updates = args.triples * args.epochs

    pure_s = bench(train_pure, problem)
    print(f"pure python : {pure_s:8.3f} s  ({updates / pure_s:>12,.0f} updates/s)")

    compiled = kernels.backends().get("compiled")
    if compiled is None:
        print("compiled    : not built (pip install -e . to compile)")
        return
    compiled_s = bench(compiled, problem)
    print(f"compiled    : {compiled_s:8.3f} s  ({updates / compiled_s:>12,.0f} updates/s)")
    print(f"speedup     : {pure_s / compiled_s:8.1f}x")

    # sanity: both kernels land on numerically identical embeddings
    pa, pb = make_problem(args.entities, args.triples, 5, args.dim), make_problem(
        args.entities, args.triples, 5, args.dim
    )
    train_pure(*pa, 0.05, 1.0)
    compiled(*pb, 0.05, 1.0)
    drift = float(np.abs(pa[0] - pb[0]).max())
    print(f"max |delta| : {drift:.3e} (pure vs compiled, 5 epochs)")


if __name__ == "__main__":
    main()
