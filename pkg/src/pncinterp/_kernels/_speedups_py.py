"""Pure-Python kernels, API-identical to the compiled ``_speedups`` module.

These are the fallback used when the extension was not built (or when
``PNCINTERP_PURE_PYTHON`` is set).  Counts are exact integers in both
implementations, so scores assembled from them are bit-identical.
"""

from __future__ import annotations

from collections import Counter

import numpy as np


def ngram_overlap_counts(gold_ids, pred_ids, max_n: int = 4):
    """Clipped n-gram matches and totals of ``pred`` against ``gold``."""
    gold = [int(t) for t in gold_ids]
    pred = [int(t) for t in pred_ids]
    clipped = np.zeros(max_n, dtype=np.int64)
    totals = np.zeros(max_n, dtype=np.int64)
    for n in range(1, max_n + 1):
        gold_grams = Counter(tuple(gold[i : i + n]) for i in range(len(gold) - n + 1))
        pred_grams = Counter(tuple(pred[i : i + n]) for i in range(len(pred) - n + 1))
        totals[n - 1] = max(len(pred) - n + 1, 0)
        clipped[n - 1] = sum(
            min(count, gold_grams[gram]) for gram, count in pred_grams.items()
        )
    return clipped, totals


def kendall_pair_counts(xs, ys):
    """Concordant and discordant pair counts over all i < j."""
    x = np.ascontiguousarray(xs, dtype=np.float64)
    y = np.ascontiguousarray(ys, dtype=np.float64)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    upper = np.triu_indices(len(x), k=1)
    product = dx[upper] * dy[upper]
    return int(np.count_nonzero(product > 0)), int(np.count_nonzero(product < 0))
