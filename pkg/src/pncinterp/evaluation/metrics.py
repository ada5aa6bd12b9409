"""The hybrid exact/semantic evaluation metric.

A pair scores by exact label match when either side is non-compositional
(1 when both are, 0 otherwise) and by the semantic matcher on the full
paraphrase sentences when both are compositional.  Undefined statistics
(zero denominators, empty pools) are surfaced as ``None`` and listed in the
report, never silently reported as 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..dataset import DataError
from ..types import (
    NON_COMPOSITIONAL,
    DatasetExample,
    Interpretation,
    NounCompound,
    Paraphrase,
    is_compositional,
)
from .matchers import MatcherUnavailableError, SemanticMatcher

InterpretationPair = tuple[Interpretation, Interpretation]


@dataclass(frozen=True)
class EvalPair:
    """One gold/prediction pair, with the compound when it is known."""

    gold: Interpretation
    pred: Interpretation
    compound: NounCompound | None = None
    id: str | None = None


def _as_interpretations(pairs: Sequence[EvalPair] | Sequence[InterpretationPair]) -> list[InterpretationPair]:
    out = []
    for pair in pairs:
        if isinstance(pair, EvalPair):
            out.append((pair.gold, pair.pred))
        else:
            gold, pred = pair
            out.append((gold, pred))
    return out


def score_pair(gold: Interpretation, pred: Interpretation, matcher: SemanticMatcher) -> float:
    """Piecewise score: exact label match unless both sides are paraphrases."""
    gold_cmp, pred_cmp = is_compositional(gold), is_compositional(pred)
    if not gold_cmp or not pred_cmp:
        return 1.0 if gold_cmp == pred_cmp else 0.0
    return float(matcher.match(gold.text, pred.text))


@dataclass(frozen=True)
class ExMatchStats:
    """Binary classification statistics with CMP as the positive class.

    ``precision_noncmp``/``recall_noncmp`` give the opposite framing (useful
    for settings whose predictions never contain one of the classes).
    """

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n_total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @staticmethod
    def _ratio(num: int, denom: int) -> float | None:
        return None if denom == 0 else num / denom

    @property
    def precision(self) -> float | None:
        return self._ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float | None:
        return self._ratio(self.tp, self.tp + self.fn)

    @property
    def accuracy(self) -> float | None:
        return self._ratio(self.tp + self.tn, self.n_total)

    @property
    def precision_noncmp(self) -> float | None:
        return self._ratio(self.tn, self.tn + self.fn)

    @property
    def recall_noncmp(self) -> float | None:
        return self._ratio(self.tn, self.tn + self.fp)


def ex_match_stats(pairs: Sequence[EvalPair] | Sequence[InterpretationPair]) -> ExMatchStats:
    """Confusion-matrix statistics over compositionality labels."""
    interpretations = _as_interpretations(pairs)
    if not interpretations:
        raise ValueError("ex_match_stats needs at least one pair")
    tp = fp = fn = tn = 0
    for gold, pred in interpretations:
        if is_compositional(gold):
            if is_compositional(pred):
                tp += 1
            else:
                fn += 1
        else:
            if is_compositional(pred):
                fp += 1
            else:
                tn += 1
    return ExMatchStats(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class SemMatchResult:
    """Mean matcher score over both-compositional pairs; None when empty."""

    mean: float | None
    n_pairs: int


def sem_match_mean(
    pairs: Sequence[EvalPair] | Sequence[InterpretationPair], matcher: SemanticMatcher
) -> SemMatchResult:
    scores = [
        matcher.match(gold.text, pred.text)
        for gold, pred in _as_interpretations(pairs)
        if is_compositional(gold) and is_compositional(pred)
    ]
    if not scores:
        return SemMatchResult(mean=None, n_pairs=0)
    return SemMatchResult(mean=sum(scores) / len(scores), n_pairs=len(scores))


def combined_mean(
    pairs: Sequence[EvalPair] | Sequence[InterpretationPair], matcher: SemanticMatcher
) -> float:
    """Mean of the piecewise score over all pairs."""
    interpretations = _as_interpretations(pairs)
    if not interpretations:
        raise ValueError("combined_mean needs at least one pair")
    return sum(score_pair(g, p, matcher) for g, p in interpretations) / len(interpretations)


@dataclass
class EvalReport:
    """All headline numbers for one prediction set.

    ``sem_mean`` and ``combined_mean`` are keyed by matcher name; matchers
    whose backing scorer was unreachable are listed in ``absent_matchers``
    and carry no columns.
    """

    n_total: int
    n_both_cmp: int
    ex_precision: float | None
    ex_recall: float | None
    ex_accuracy: float | None
    ex_precision_noncmp: float | None
    ex_recall_noncmp: float | None
    sem_mean: dict[str, float | None] = field(default_factory=dict)
    combined_mean: dict[str, float] = field(default_factory=dict)
    matcher_versions: dict[str, str] = field(default_factory=dict)
    absent_matchers: list[str] = field(default_factory=list)

    def undefined_fields(self) -> list[str]:
        names = []
        for name in ("ex_precision", "ex_recall", "ex_accuracy", "ex_precision_noncmp", "ex_recall_noncmp"):
            if getattr(self, name) is None:
                names.append(name)
        names.extend(f"sem_mean.{k}" for k, v in self.sem_mean.items() if v is None)
        return names

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_both_cmp": self.n_both_cmp,
            "ex_match": {
                "precision": self.ex_precision,
                "recall": self.ex_recall,
                "accuracy": self.ex_accuracy,
                "precision_noncmp": self.ex_precision_noncmp,
                "recall_noncmp": self.ex_recall_noncmp,
            },
            "sem_match": dict(self.sem_mean),
            "sem_ex_match": dict(self.combined_mean),
            "matchers": dict(self.matcher_versions),
            "absent_matchers": list(self.absent_matchers),
            "undefined": self.undefined_fields(),
        }


def evaluate_pairs(
    pairs: Sequence[EvalPair] | Sequence[InterpretationPair],
    matchers: Mapping[str, SemanticMatcher],
) -> EvalReport:
    """Full report over a pair list; order of pairs does not matter."""
    stats = ex_match_stats(pairs)
    report = EvalReport(
        n_total=stats.n_total,
        n_both_cmp=stats.tp,
        ex_precision=stats.precision,
        ex_recall=stats.recall,
        ex_accuracy=stats.accuracy,
        ex_precision_noncmp=stats.precision_noncmp,
        ex_recall_noncmp=stats.recall_noncmp,
    )
    for name, matcher in matchers.items():
        try:
            sem = sem_match_mean(pairs, matcher)
            report.sem_mean[name] = sem.mean
            report.combined_mean[name] = combined_mean(pairs, matcher)
            report.matcher_versions[name] = matcher.version
        except MatcherUnavailableError:
            report.absent_matchers.append(name)
    return report


def load_predictions(path: str | Path) -> dict[str, Interpretation]:
    """Load a prediction file: JSONL of {"id", "prediction": text or null}.

    ``prediction`` holds the full predicted paraphrase sentence; null marks a
    non-compositional prediction.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"prediction file not found: {path}")
    predictions: dict[str, Interpretation] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                example_id = str(record["id"])
                text = record["prediction"]
                predictions[example_id] = NON_COMPOSITIONAL if text is None else Paraphrase(text)
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return predictions


def save_predictions(predictions: Mapping[str, Interpretation], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for example_id, interpretation in predictions.items():
            text = interpretation.text if is_compositional(interpretation) else None
            handle.write(json.dumps({"id": example_id, "prediction": text}, ensure_ascii=False))
            handle.write("\n")


def pair_with_predictions(
    examples: Iterable[DatasetExample], predictions: Mapping[str, Interpretation]
) -> list[EvalPair]:
    """Align predictions to dataset examples by id."""
    pairs = []
    for example in examples:
        if example.id not in predictions:
            raise DataError(f"no prediction for example id {example.id!r}")
        pairs.append(
            EvalPair(gold=example.gold, pred=predictions[example.id], compound=example.compound, id=example.id)
        )
    return pairs
