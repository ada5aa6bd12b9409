"""Core value types: compounds, interpretations, dataset examples, split specs.

Everything here is an immutable value object; instances are safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class NounCompound:
    """A two-word proper-noun compound located inside its source sentence.

    ``span`` is the (start, end) character range of the compound within
    ``sentence``.  The proper noun and common noun are single tokens; the
    sentence text at the span must spell out the compound (up to whitespace).
    """

    proper_noun: str
    common_noun: str
    sentence: str
    span: tuple[int, int]

    def __post_init__(self) -> None:
        for name, value in (("proper_noun", self.proper_noun), ("common_noun", self.common_noun)):
            if not value:
                raise ValueError(f"{name} must be non-empty")
            if len(value.split()) != 1:
                raise ValueError(f"{name} must be a single token, got {value!r}")
        object.__setattr__(self, "span", tuple(self.span))
        start, end = self.span
        if not (0 <= start < end <= len(self.sentence)):
            raise ValueError(f"span {self.span} out of range for sentence of length {len(self.sentence)}")
        spanned = _normalize_ws(self.sentence[start:end])
        if spanned != f"{self.proper_noun} {self.common_noun}":
            raise ValueError(
                f"sentence[{start}:{end}] is {self.sentence[start:end]!r}, "
                f"expected {self.proper_noun!r} + {self.common_noun!r}"
            )

    @property
    def text(self) -> str:
        """The compound itself, e.g. ``"Covid vaccine"``."""
        return f"{self.proper_noun} {self.common_noun}"


@dataclass(frozen=True)
class Paraphrase:
    """A compositional interpretation: a free-form full-sentence paraphrase."""

    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("paraphrase text must be non-empty")


@dataclass(frozen=True)
class NonCompositional:
    """Marker for compounds that name an entity with no implicit relation."""


NON_COMPOSITIONAL = NonCompositional()

Interpretation = Union[Paraphrase, NonCompositional]


def is_compositional(interpretation: Interpretation) -> bool:
    return isinstance(interpretation, Paraphrase)


@dataclass(frozen=True)
class DatasetExample:
    """A compound paired with its gold interpretation and a stable id.

    Gold paraphrases are full sentences and must begin with the compound
    (predictions are free-form; this constraint applies to gold only).
    """

    compound: NounCompound
    gold: Interpretation
    id: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("id must be non-empty")
        if isinstance(self.gold, Paraphrase):
            text = self.gold.text
            prefix = self.compound.text
            if not (text == prefix or text.startswith(prefix + " ")):
                raise ValueError(
                    f"gold paraphrase {text!r} does not begin with the compound {prefix!r}"
                )


SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class SplitSpec:
    """How to carve a dataset into train/validation/test.

    Exactly one of ``sizes`` (absolute counts) or ``ratios`` (fractions
    summing to 1) must be given.  ``mode`` is ``"common-noun-disjoint"`` or
    ``"random"``.
    """

    mode: str
    sizes: tuple[int, int, int] | None = None
    ratios: tuple[float, float, float] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("common-noun-disjoint", "random"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if (self.sizes is None) == (self.ratios is None):
            raise ValueError("exactly one of sizes or ratios must be given")
        if self.sizes is not None:
            object.__setattr__(self, "sizes", tuple(self.sizes))
            if len(self.sizes) != 3 or any(s < 0 for s in self.sizes):
                raise ValueError(f"sizes must be three non-negative counts, got {self.sizes}")
        if self.ratios is not None:
            object.__setattr__(self, "ratios", tuple(self.ratios))
            if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
                raise ValueError(f"ratios must be three non-negative fractions, got {self.ratios}")
            if abs(sum(self.ratios) - 1.0) > 1e-9:
                raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)}")

    def resolve_sizes(self, total: int) -> tuple[int, int, int]:
        """Concrete split sizes for a corpus of ``total`` examples.

        Ratios are rounded with the largest-remainder method so the sizes
        always sum to ``total``; explicit sizes must already sum to it.
        """
        if self.sizes is not None:
            if sum(self.sizes) != total:
                raise ValueError(f"sizes {self.sizes} sum to {sum(self.sizes)}, corpus has {total}")
            return self.sizes
        raw = [r * total for r in self.ratios]
        sizes = [int(x) for x in raw]
        remainders = sorted(range(3), key=lambda i: (raw[i] - sizes[i], -i), reverse=True)
        for i in range(total - sum(sizes)):
            sizes[remainders[i % 3]] += 1
        return tuple(sizes)
