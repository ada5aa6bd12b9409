# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels for the n-gram matcher and rank correlation.

Mirrors the API of ``_speedups_py``; the package selects one of the two at
import time.  Token sequences arrive as small per-pair integer id arrays, so
n-grams are packed positionally into 64-bit keys (base 65536, ids offset by
one).  Callers guarantee local vocabularies stay below that base.
"""

import numpy as np

from libcpp.unordered_map cimport unordered_map


def ngram_overlap_counts(gold_ids, pred_ids, int max_n=4):
    """Clipped n-gram matches and totals of ``pred`` against ``gold``.

    Returns ``(clipped, totals)`` int64 arrays of length ``max_n`` where
    ``clipped[n-1]`` is the modified (gold-clipped) n-gram match count and
    ``totals[n-1]`` the number of n-grams in ``pred``.
    """
    cdef int[:] gold = np.ascontiguousarray(gold_ids, dtype=np.int32)
    cdef int[:] pred = np.ascontiguousarray(pred_ids, dtype=np.int32)
    clipped_arr = np.zeros(max_n, dtype=np.int64)
    totals_arr = np.zeros(max_n, dtype=np.int64)
    cdef long long[:] clipped = clipped_arr
    cdef long long[:] totals = totals_arr

    cdef unordered_map[unsigned long long, long long] counts
    cdef unsigned long long key
    cdef Py_ssize_t i, j
    cdef int n
    cdef Py_ssize_t n_gold, n_pred

    for n in range(1, max_n + 1):
        counts.clear()
        n_gold = gold.shape[0] - n + 1
        n_pred = pred.shape[0] - n + 1
        for i in range(max(n_gold, 0)):
            key = 0
            for j in range(n):
                key = key * 65536ULL + <unsigned long long> (gold[i + j] + 1)
            counts[key] = counts[key] + 1
        for i in range(max(n_pred, 0)):
            key = 0
            for j in range(n):
                key = key * 65536ULL + <unsigned long long> (pred[i + j] + 1)
            totals[n - 1] += 1
            # operator[] default-inserts 0 for unseen n-grams; the remaining
            # gold budget for each n-gram is consumed to implement clipping.
            if counts[key] > 0:
                clipped[n - 1] += 1
                counts[key] = counts[key] - 1
    return clipped_arr, totals_arr


def kendall_pair_counts(xs, ys):
    """Concordant and discordant pair counts over all i < j.

    Pairs tied in either series count toward neither total.
    """
    cdef double[:] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[:] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef long long conc = 0, disc = 0
    cdef double dx, dy

    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx != 0 and dy != 0:
                if (dx > 0) == (dy > 0):
                    conc += 1
                else:
                    disc += 1
    return int(conc), int(disc)
