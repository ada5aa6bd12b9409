"""Semantic matchers: the built-in n-gram overlap scorer and adapters for
learned scorers served out-of-process.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Callable, Protocol, runtime_checkable

import httpx

from .._kernels import ngram_overlap_counts

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@runtime_checkable
class SemanticMatcher(Protocol):
    """Graded similarity between a gold and a predicted paraphrase."""

    name: str
    version: str
    score_range: tuple[float, float]

    def match(self, gold: str, pred: str) -> float: ...


class MatcherUnavailableError(Exception):
    """The external scorer behind a matcher cannot be reached."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace after separating punctuation."""
    return _TOKEN_RE.findall(text.lower())


def ngram_overlap_score(gold_tokens: list[str], pred_tokens: list[str], max_n: int = 4) -> float:
    """Sentence-level modified n-gram precision score in [0, 1].

    Geometric mean of modified precisions for n = 1..max_n times a brevity
    penalty.  Precisions for n >= 2 are add-one smoothed (numerator and
    denominator) so single-sentence scores do not collapse to zero; zero
    unigram overlap still scores 0.
    """
    if not pred_tokens or not gold_tokens:
        return 0.0
    vocab: dict[str, int] = {}
    for token in gold_tokens:
        vocab.setdefault(token, len(vocab))
    for token in pred_tokens:
        vocab.setdefault(token, len(vocab))
    gold_ids = [vocab[t] for t in gold_tokens]
    pred_ids = [vocab[t] for t in pred_tokens]
    clipped, totals = ngram_overlap_counts(gold_ids, pred_ids, max_n)

    log_sum = 0.0
    for n in range(1, max_n + 1):
        matched, total = int(clipped[n - 1]), int(totals[n - 1])
        if n >= 2:
            matched, total = matched + 1, total + 1
        if matched == 0:
            return 0.0
        log_sum += math.log(matched / total)
    precision = math.exp(log_sum / max_n)

    if len(pred_tokens) >= len(gold_tokens):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(gold_tokens) / len(pred_tokens))
    return brevity * precision


class NgramMatcher:
    """The rule-based matcher: n-gram overlap on full paraphrase sentences."""

    name = "ngram"
    version = "ngram-overlap-4"
    score_range = (0.0, 1.0)

    def __init__(self, max_n: int = 4):
        self.max_n = max_n

    def match(self, gold: str, pred: str) -> float:
        return ngram_overlap_score(tokenize(gold), tokenize(pred), self.max_n)


class LearnedMatcher:
    """Adapter around an external learned scorer.

    The scorer itself (e.g. a fine-tuned regression model) lives outside this
    package; this wraps a callable, a fixture file, or an HTTP endpoint and
    records the scorer identity so reports say what produced the numbers.
    """

    score_range = (float("-inf"), float("inf"))

    def __init__(self, score_fn: Callable[[str, str], float], name: str, version: str):
        self._score_fn = score_fn
        self.name = name
        self.version = version

    def match(self, gold: str, pred: str) -> float:
        return float(self._score_fn(gold, pred))

    @classmethod
    def from_callable(cls, fn: Callable[[str, str], float], name: str = "learned", version: str = "callable") -> "LearnedMatcher":
        return cls(fn, name=name, version=version)

    @classmethod
    def from_fixture(cls, path: str | Path) -> "LearnedMatcher":
        """Scores from a JSON map ``{"<gold>|||<pred>": score}`` (tests)."""
        table = json.loads(Path(path).read_text(encoding="utf-8"))

        def fn(gold: str, pred: str) -> float:
            key = f"{gold}|||{pred}"
            if key not in table:
                raise MatcherUnavailableError(f"fixture scorer has no entry for {key!r}")
            return table[key]

        return cls(fn, name="learned", version=f"fixture:{Path(path).name}")

    @classmethod
    def from_endpoint(
        cls, url: str, timeout: float = 30.0, transport: httpx.BaseTransport | None = None
    ) -> "LearnedMatcher":
        """Scores from a service: POST {"reference", "candidate"} -> {"score"}."""
        client = httpx.Client(timeout=timeout, transport=transport)

        def fn(gold: str, pred: str) -> float:
            try:
                response = client.post(url, json={"reference": gold, "candidate": pred})
            except httpx.HTTPError as exc:
                raise MatcherUnavailableError(f"scorer endpoint unreachable: {exc}") from exc
            if response.status_code != 200:
                raise MatcherUnavailableError(f"scorer endpoint returned HTTP {response.status_code}")
            return response.json()["score"]

        return cls(fn, name="learned", version=f"endpoint:{url}")
