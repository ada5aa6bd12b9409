"""Deterministic synthetic corpora for desk-scale runs and tests.

The generator mimics the structure of the real annotation data: the common
noun drives the relation template, and a fixed subset of proper nouns (pure
entity names) makes their compounds non-compositional.  That keeps tiny
models able to fit the data while exercising every code path.
"""

from __future__ import annotations

import random

from .types import NON_COMPOSITIONAL, DatasetExample, NounCompound, Paraphrase

_RELATIONAL_PROPER = (
    "Oxford", "Covid", "London", "Shakespeare", "Tesla", "Alpine", "Baltic",
    "Buddhist", "Roman", "Andean", "Nordic", "Saxon", "Tudor", "Persian",
    "Mongol", "Inca", "Basque", "Breton", "Coptic", "Magyar", "Pashto",
    "Swahili", "Tamil", "Zulu", "Navajo", "Maori", "Inuit", "Cree",
)

# Compounds headed by these proper nouns are non-compositional: they name a
# specific entity rather than expressing a relation.
_ENTITY_PROPER = (
    "Watergate", "Concorde", "Kawasaki", "Foxtrot", "Vesper", "Quasar",
    "Zephyr", "Obsidian", "Krakatoa", "Meridian", "Palomino", "Sierra",
)

_RELATIONS = {
    "vaccine": "is a vaccine against {p}",
    "theatre": "is a theatre located in {p}",
    "biography": "is a biography about {p}",
    "outbreak": "is an outbreak of {p}",
    "government": "is located in {p}",
    "monks": "are religious people who are {p}",
    "economy": "is the financial condition of {p}",
    "hospital": "is a hospital in {p}",
    "festival": "is a festival celebrating {p}",
    "vocabulary": "is the vocabulary of {p}",
    "recipe": "is a recipe from {p}",
    "sanctions": "are sanctions imposed by {p}",
    "treaty": "is a treaty signed by {p}",
    "carving": "is a carving made by {p}",
    "melody": "is a melody composed in {p}",
    "harvest": "is the harvest of {p}",
    "dialect": "is a dialect of {p}",
    "pottery": "is pottery made by {p}",
}

_SENTENCES = (
    "The report about the {c} was published yesterday .",
    "Experts discussed the {c} at the annual meeting .",
    "Nobody expected the {c} to draw such attention .",
    "A documentary on the {c} aired last week .",
    "Officials confirmed the {c} early on Monday .",
)


def make_example(proper: str, common: str, sentence_template: str, example_id: str) -> DatasetExample:
    compound_text = f"{proper} {common}"
    sentence = sentence_template.format(c=compound_text)
    start = sentence.index(compound_text)
    nc = NounCompound(
        proper_noun=proper,
        common_noun=common,
        sentence=sentence,
        span=(start, start + len(compound_text)),
    )
    if proper in _ENTITY_PROPER:
        gold = NON_COMPOSITIONAL
    else:
        gold = Paraphrase(f"{compound_text} {_RELATIONS[common].format(p=proper)}")
    return DatasetExample(compound=nc, gold=gold, id=example_id)


def make_synthetic_dataset(n: int, seed: int = 0) -> list[DatasetExample]:
    """``n`` distinct examples, roughly one third non-compositional."""
    rng = random.Random(seed)
    commons = list(_RELATIONS)
    pairs: list[tuple[str, str]] = []
    seen = set()
    while len(pairs) < n:
        if rng.random() < 0.36:
            proper = rng.choice(_ENTITY_PROPER)
        else:
            proper = rng.choice(_RELATIONAL_PROPER)
        common = rng.choice(commons)
        if (proper, common) in seen:
            continue
        seen.add((proper, common))
        pairs.append((proper, common))
        if len(seen) >= (len(_RELATIONAL_PROPER) + len(_ENTITY_PROPER)) * len(commons):
            raise ValueError(f"cannot generate {n} distinct examples")
    return [
        make_example(proper, common, _SENTENCES[i % len(_SENTENCES)], f"syn-{i:05d}")
        for i, (proper, common) in enumerate(pairs)
    ]
