"""Character-shuffle ablation: scramble one constituent noun everywhere it
matters (compound, sentence span, gold paraphrase) to probe how much each
noun drives model predictions.
"""

from __future__ import annotations

import logging
import random
import re
from typing import Literal, Sequence

from ..types import DatasetExample, NounCompound, Paraphrase, is_compositional

logger = logging.getLogger(__name__)

ShuffleTarget = Literal["proper", "common"]


def _replace_word(text: str, old: str, new: str) -> str:
    # Whole-token replacement; \b mishandles nouns like "Covid-19".
    return re.sub(rf"(?<!\w){re.escape(old)}(?!\w)", new, text)


def apply_char_permutation(
    example: DatasetExample, target: ShuffleTarget, permutation: Sequence[int]
) -> DatasetExample:
    """Rewrite one noun of an example by a character permutation.

    The permutation applies to the noun inside the compound, the sentence
    occurrence at the example span, and all occurrences in the gold
    paraphrase; everything else is untouched.
    """
    nc = example.compound
    old = nc.proper_noun if target == "proper" else nc.common_noun
    if sorted(permutation) != list(range(len(old))):
        raise ValueError(f"invalid permutation of length {len(old)}: {permutation!r}")
    new = "".join(old[i] for i in permutation)

    start, end = nc.span
    if target == "proper":
        noun_start = start
    else:
        noun_start = end - len(old)
    sentence = nc.sentence[:noun_start] + new + nc.sentence[noun_start + len(old) :]
    compound = NounCompound(
        proper_noun=new if target == "proper" else nc.proper_noun,
        common_noun=new if target == "common" else nc.common_noun,
        sentence=sentence,
        span=nc.span,
    )
    gold = example.gold
    if is_compositional(gold):
        gold = Paraphrase(_replace_word(gold.text, old, new))
    return DatasetExample(compound=compound, gold=gold, id=example.id)


def draw_permutation(token: str, rng: random.Random) -> list[int]:
    """A seeded permutation of the token's characters, never the identity
    when the token has two differing characters."""
    permutation = list(range(len(token)))
    for _ in range(100):
        rng.shuffle(permutation)
        if "".join(token[i] for i in permutation) != token:
            return permutation
    # All shuffles spelled the same string; swap the first differing pair.
    for i in range(len(token) - 1):
        if token[i] != token[i + 1]:
            permutation = list(range(len(token)))
            permutation[i], permutation[i + 1] = permutation[i + 1], permutation[i]
            return permutation
    return list(range(len(token)))


def shuffle_ablation(example: DatasetExample, target: ShuffleTarget, seed: int) -> DatasetExample:
    """Scramble the characters of one constituent noun, deterministically.

    Nouns with fewer than two distinct characters are returned unchanged
    (there is no non-identity respelling).
    """
    nc = example.compound
    noun = nc.proper_noun if target == "proper" else nc.common_noun
    if len(noun) < 2:
        logger.warning("cannot shuffle single-character noun %r in example %s", noun, example.id)
        return example
    if len(set(noun)) < 2:
        return example
    permutation = draw_permutation(noun, random.Random(seed))
    return apply_char_permutation(example, target, permutation)


def shuffle_dataset(
    examples: list[DatasetExample], target: ShuffleTarget, seed: int
) -> list[DatasetExample]:
    """Apply the ablation to every example, one derived seed each."""
    rng = random.Random(seed)
    return [shuffle_ablation(example, target, rng.randrange(2**31)) for example in examples]
