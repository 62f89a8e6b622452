"""Pure-Python fallback for the embedding SGD kernel.

Mirrors `_sgd_cy` operation for operation: one corrupted tail per positive,
margin step only when violated, entity rows renormalized after every epoch.
Kept dependency-light and order-identical so either backend yields the same
rankings (floating-point results agree to rounding, not bit-for-bit).
"""

from __future__ import annotations

import math

import numpy as np


def train_sgd(
    ent: np.ndarray,
    rel: np.ndarray,
    heads: np.ndarray,
    rels: np.ndarray,
    tails: np.ndarray,
    corrupt: np.ndarray,
    lr: float,
    margin: float,
) -> None:
    """Run margin-based SGD in place over `corrupt.shape[0]` epochs."""
    epochs, n_triples = corrupt.shape
    for epoch in range(epochs):
        row = corrupt[epoch]
        for i in range(n_triples):
            h = heads[i]
            r = rels[i]
            t = tails[i]
            tc = row[i]
            hr = ent[h] + rel[r]
            d_pos = hr - ent[t]
            d_neg = hr - ent[tc]
            dist_pos = math.sqrt(float(d_pos @ d_pos))
            dist_neg = math.sqrt(float(d_neg @ d_neg))
            if margin + dist_pos - dist_neg <= 0.0:
                continue
            g_pos = d_pos / dist_pos if dist_pos > 0.0 else np.zeros_like(d_pos)
            g_neg = d_neg / dist_neg if dist_neg > 0.0 else np.zeros_like(d_neg)
            step = lr * (g_pos - g_neg)
            ent[h] -= step
            rel[r] -= step
            ent[t] += lr * g_pos
            ent[tc] -= lr * g_neg
        for j in range(ent.shape[0]):
            norm = math.sqrt(float(ent[j] @ ent[j]))
            if norm > 0.0:
                ent[j] /= norm
