# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled embedding SGD kernel (hot loop of knowledge-graph training).

Same update sequence as `_sgd_py.train_sgd`; selected automatically at import
when the extension built.
"""

import numpy as np

from libc.math cimport sqrt


def train_sgd(
    double[:, ::1] ent,
    double[:, ::1] rel,
    long[::1] heads,
    long[::1] rels,
    long[::1] tails,
    long[:, ::1] corrupt,
    double lr,
    double margin,
):
    cdef Py_ssize_t epochs = corrupt.shape[0]
    cdef Py_ssize_t n_triples = corrupt.shape[1]
    cdef Py_ssize_t dim = ent.shape[1]
    cdef Py_ssize_t n_entities = ent.shape[0]
    cdef Py_ssize_t epoch, i, k, j
    cdef long h, r, t, tc
    cdef double dist_pos, dist_neg, norm, gp, gn
    cdef double[::1] d_pos = np.empty(dim, dtype=np.float64)
    cdef double[::1] d_neg = np.empty(dim, dtype=np.float64)

    for epoch in range(epochs):
        for i in range(n_triples):
            h = heads[i]
            r = rels[i]
            t = tails[i]
            tc = corrupt[epoch, i]
            dist_pos = 0.0
            dist_neg = 0.0
            for k in range(dim):
                d_pos[k] = ent[h, k] + rel[r, k] - ent[t, k]
                d_neg[k] = ent[h, k] + rel[r, k] - ent[tc, k]
                dist_pos += d_pos[k] * d_pos[k]
                dist_neg += d_neg[k] * d_neg[k]
            dist_pos = sqrt(dist_pos)
            dist_neg = sqrt(dist_neg)
            if margin + dist_pos - dist_neg <= 0.0:
                continue
            for k in range(dim):
                gp = d_pos[k] / dist_pos if dist_pos > 0.0 else 0.0
                gn = d_neg[k] / dist_neg if dist_neg > 0.0 else 0.0
                ent[h, k] -= lr * (gp - gn)
                rel[r, k] -= lr * (gp - gn)
                ent[t, k] += lr * gp
                ent[tc, k] -= lr * gn
        for j in range(n_entities):
            norm = 0.0
            for k in range(dim):
                norm += ent[j, k] * ent[j, k]
            norm = sqrt(norm)
            if norm > 0.0:
                for k in range(dim):
                    ent[j, k] /= norm
