"""Metric-quality checks: correlation of matcher scores with human ratings."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..dataset import DataError
from .._kernels import kendall_pair_counts

RATING_SCALE = {"bad": 0, "average": 1, "good": 2}


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson r; None for constant series (undefined, not zero)."""
    n = len(x)
    if n != len(y):
        raise ValueError("series must have equal length")
    if n < 2:
        return None
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = sum(v * v for v in dx)
    var_y = sum(v * v for v in dy)
    if var_x == 0 or var_y == 0:
        return None
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


def _tie_pairs(values: Sequence[float]) -> int:
    return sum(t * (t - 1) // 2 for t in Counter(values).values())


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Tie-corrected Kendall rank correlation from exact pair counts.

    tau-b = (C - D) / sqrt((n0 - tx)(n0 - ty)) with n0 = n(n-1)/2 and tx, ty
    the tied-pair counts of each series; None when a series is constant.
    """
    n = len(x)
    if n != len(y):
        raise ValueError("series must have equal length")
    if n < 2:
        return None
    concordant, discordant = kendall_pair_counts(list(x), list(y))
    n0 = n * (n - 1) // 2
    tx = _tie_pairs(x)
    ty = _tie_pairs(y)
    if n0 == tx or n0 == ty:
        return None
    return (concordant - discordant) / math.sqrt((n0 - tx) * (n0 - ty))


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float | None
    kendall: float | None
    n: int

    def to_dict(self) -> dict:
        return {
            "pearson": self.pearson,
            "kendall_tau_b": self.kendall,
            "n": self.n,
            "undefined": [k for k, v in (("pearson", self.pearson), ("kendall_tau_b", self.kendall)) if v is None],
        }


def metric_correlation(scores: Sequence[float], judgements: Sequence[float]) -> CorrelationResult:
    """Correlate metric scores with paired human judgements.

    Needs at least 3 paired items; constant series yield explicit undefined
    (None) coefficients.
    """
    if len(scores) != len(judgements):
        raise ValueError(f"{len(scores)} scores but {len(judgements)} judgements")
    if len(scores) < 3:
        raise ValueError("correlation needs at least 3 paired items")
    return CorrelationResult(
        pearson=pearson(scores, judgements),
        kendall=kendall_tau_b(scores, judgements),
        n=len(scores),
    )


def load_judgements(path: str | Path) -> dict[str, int]:
    """Load human ratings: JSONL of {"id", "rating": bad|average|good}."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"judgement file not found: {path}")
    judgements: dict[str, int] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                rating = record["rating"]
                judgements[str(record["id"])] = RATING_SCALE[rating]
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return judgements
