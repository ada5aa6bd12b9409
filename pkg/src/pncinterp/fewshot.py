"""Zero-shot masked-template generation and few-shot in-context prompting.

Zero-shot fills the single-slot template ``"<w1> <w2> is a <mask> the <w1>"``
and splices the infill back in, so it always yields a paraphrase.  Few-shot
assembles K demonstrations (chosen at random or by nearest neighbors in an
embedding space) ahead of the query and parses the completion with the usual
sentinel rule.
"""

from __future__ import annotations

import json
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .serialize import parse_output, serialize_target
from .types import DatasetExample, Interpretation, NounCompound, Paraphrase


class PromptOverflowError(Exception):
    """The assembled prompt exceeds the backbone's context budget."""


class Embedder(ABC):
    """Text to fixed-dimension vector; same text always embeds identically."""

    @abstractmethod
    def embed(self, text: str) -> np.ndarray: ...


class FixtureEmbedder(Embedder):
    """Embeddings from an in-memory or JSON ``{text: vector}`` map."""

    def __init__(self, vectors: dict[str, Sequence[float]]):
        self._vectors = {text: np.asarray(vec, dtype=np.float64) for text, vec in vectors.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureEmbedder":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def embed(self, text: str) -> np.ndarray:
        try:
            return self._vectors[text]
        except KeyError:
            raise KeyError(f"no fixture embedding for {text!r}") from None


class BackboneEmbedder(Embedder):
    """Mean of a backbone's encoder hidden states over the text."""

    def __init__(self, backbone):
        self._backbone = backbone

    def embed(self, text: str) -> np.ndarray:
        return self._backbone.encode(text).mean(axis=0).astype(np.float64)


@dataclass(frozen=True)
class RandomSelector:
    """K uniform draws without replacement, fixed by the seed."""

    k: int
    seed: int = 0


@dataclass(frozen=True)
class KnnSelector:
    """The K training compounds closest to the query by cosine distance.

    Ties break by dataset id, so selection is deterministic.
    """

    k: int
    embedder: Embedder


DemoSelector = Union[RandomSelector, KnnSelector]


def _cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        raise ValueError("cannot compute cosine distance of a zero-norm embedding")
    return 1.0 - float(np.dot(a, b)) / norm


def select_demos(
    query: NounCompound, train: Sequence[DatasetExample], selector: DemoSelector
) -> list[DatasetExample]:
    """Pick the demonstration examples for one query."""
    if not train:
        raise ValueError("training set is empty")
    if selector.k < 1 or selector.k > len(train):
        raise ValueError(f"k={selector.k} out of range for training set of {len(train)}")
    if isinstance(selector, RandomSelector):
        return random.Random(selector.seed).sample(list(train), selector.k)
    query_vec = selector.embedder.embed(query.text)
    cache: dict[str, np.ndarray] = {}
    ranked = []
    for example in train:
        text = example.compound.text
        if text not in cache:
            cache[text] = selector.embedder.embed(text)
        ranked.append((_cosine_distance(query_vec, cache[text]), example.id, example))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return [example for _, _, example in ranked[: selector.k]]


def zero_shot_template(nc: NounCompound, mask_token: str = "<extra_id_0>") -> str:
    """The masked paraphrase template for one compound."""
    return f"{nc.proper_noun} {nc.common_noun} is a {mask_token} the {nc.proper_noun}"


def splice_infill(template: str, infill: str, mask_token: str = "<extra_id_0>") -> str:
    """Substitute the generated span into the template slot."""
    return template.replace(mask_token, infill, 1)


def zero_shot_predict(nc: NounCompound, backbone) -> Interpretation:
    """Fill the template and return it as a paraphrase.

    This path never predicts non-compositional: the template has no way to
    express it.
    """
    template = zero_shot_template(nc, backbone.infill_token)
    filled = splice_infill(template, backbone.infill(template), backbone.infill_token)
    return Paraphrase(" ".join(filled.split()))


def assemble_prompt(
    demos: Sequence[DatasetExample], query: NounCompound, max_tokens: int | None = None
) -> str:
    """One line per demonstration, then the open-ended query line:

        London theatre => London theatre is a theatre in London
        Oxford vaccine =>
    """
    lines = [
        f"{demo.compound.text} => {serialize_target(demo.compound, demo.gold)}" for demo in demos
    ]
    lines.append(f"{query.text} =>")
    prompt = "\n".join(lines)
    if max_tokens is not None:
        n_tokens = len(prompt.split())
        if n_tokens > max_tokens:
            raise PromptOverflowError(
                f"prompt of {n_tokens} tokens exceeds the context budget of {max_tokens}; "
                f"use fewer demonstrations"
            )
    return prompt


def few_shot_predict(
    nc: NounCompound,
    train: Sequence[DatasetExample],
    selector: DemoSelector,
    backbone,
) -> Interpretation:
    """In-context prediction: demos + query in, first completion line parsed."""
    demos = select_demos(nc, train, selector)
    prompt = assemble_prompt(demos, nc, max_tokens=backbone.context_budget)
    completion = backbone.generate(prompt).split("\n")[0]
    return parse_output(nc, completion)
