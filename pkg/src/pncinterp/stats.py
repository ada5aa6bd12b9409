"""Relation frequency statistics over compositional examples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .types import DatasetExample, Paraphrase


def relation_of(example: DatasetExample) -> str | None:
    """The bare relation string of a compositional example, else None.

    Strips the leading compound and, when the paraphrase ends with the proper
    noun, that trailing token: "Leake government is located in Leake" yields
    "is located in".
    """
    if not isinstance(example.gold, Paraphrase):
        return None
    text = example.gold.text
    prefix = example.compound.text
    if text.startswith(prefix + " "):
        text = text[len(prefix) + 1 :]
    elif text == prefix:
        return ""
    tokens = text.split()
    if tokens and tokens[-1] == example.compound.proper_noun:
        tokens = tokens[:-1]
    return " ".join(tokens)


@dataclass
class RelationStats:
    """Frequency table of relation strings, sorted by descending count."""

    frequencies: list[tuple[str, int]] = field(default_factory=list)
    total_compositional: int = 0

    @property
    def n_unique(self) -> int:
        return len(self.frequencies)

    @property
    def n_singletons(self) -> int:
        return sum(1 for _, count in self.frequencies if count == 1)

    @property
    def mean_frequency(self) -> float:
        if not self.frequencies:
            return 0.0
        return self.total_compositional / len(self.frequencies)

    def top(self, k: int = 5) -> list[tuple[str, int]]:
        return self.frequencies[:k]

    def frequency_buckets(self) -> dict[str, int]:
        """How many relations occur exactly 1..9 times, and 10 or more."""
        buckets = {str(i): 0 for i in range(1, 10)}
        buckets["10+"] = 0
        for _, count in self.frequencies:
            buckets[str(count) if count < 10 else "10+"] += 1
        return buckets

    def to_dict(self) -> dict:
        return {
            "n_compositional": self.total_compositional,
            "n_unique_relations": self.n_unique,
            "n_singleton_relations": self.n_singletons,
            "mean_examples_per_relation": self.mean_frequency,
            "frequency_buckets": self.frequency_buckets(),
            "top_relations": [list(item) for item in self.top(10)],
        }


def relation_stats(examples: list[DatasetExample]) -> RelationStats:
    """Tally relation strings across the compositional examples.

    Non-compositional examples are skipped.  Ties in frequency are ordered
    alphabetically so the table is deterministic.
    """
    counts = Counter()
    total = 0
    for example in examples:
        relation = relation_of(example)
        if relation is None:
            continue
        counts[relation] += 1
        total += 1
    frequencies = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return RelationStats(frequencies=frequencies, total_compositional=total)
