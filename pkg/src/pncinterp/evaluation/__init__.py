"""Evaluation: the hybrid exact/semantic metric, matchers, correlation, and
the template-scoring probe.
"""

from .correlation import CorrelationResult, kendall_tau_b, load_judgements, metric_correlation, pearson
from .matchers import LearnedMatcher, MatcherUnavailableError, NgramMatcher, SemanticMatcher, tokenize
from .metrics import (
    EvalPair,
    EvalReport,
    ExMatchStats,
    SemMatchResult,
    combined_mean,
    evaluate_pairs,
    ex_match_stats,
    load_predictions,
    pair_with_predictions,
    save_predictions,
    score_pair,
    sem_match_mean,
)
from .probe import dummy_relation_pairs, dummy_relation_probe

__all__ = [
    "CorrelationResult",
    "EvalPair",
    "EvalReport",
    "ExMatchStats",
    "LearnedMatcher",
    "MatcherUnavailableError",
    "NgramMatcher",
    "SemMatchResult",
    "SemanticMatcher",
    "combined_mean",
    "dummy_relation_pairs",
    "dummy_relation_probe",
    "evaluate_pairs",
    "ex_match_stats",
    "kendall_tau_b",
    "load_judgements",
    "load_predictions",
    "metric_correlation",
    "pair_with_predictions",
    "pearson",
    "save_predictions",
    "score_pair",
    "sem_match_mean",
    "tokenize",
]
