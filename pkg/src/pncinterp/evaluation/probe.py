"""Template-scoring probe: how much credit do matchers give to predictions
that only share template words with the gold?

Every pair whose gold is non-compositional gets its prediction forced to the
dummy paraphrase ``"<compound> is none of <common noun>"``, and its gold side
rendered as the sentinel sentence, so the pair lands in the semantic-matching
pool with a prediction that is lexically close but semantically wrong.
Matchers driven by surface overlap keep rewarding these; meaning-aware ones
should not.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from ..serialize import serialize_target
from ..types import NON_COMPOSITIONAL, Paraphrase, is_compositional
from .matchers import SemanticMatcher
from .metrics import EvalPair, EvalReport, evaluate_pairs


def dummy_relation_pairs(pairs: Sequence[EvalPair]) -> list[EvalPair]:
    """The probe transform; pairs with compositional gold pass through."""
    transformed = []
    for pair in pairs:
        if is_compositional(pair.gold):
            transformed.append(pair)
            continue
        if pair.compound is None:
            raise ValueError("dummy-relation probe needs the compound for non-compositional pairs")
        nc = pair.compound
        transformed.append(
            EvalPair(
                gold=Paraphrase(serialize_target(nc, NON_COMPOSITIONAL)),
                pred=Paraphrase(f"{nc.text} is none of {nc.common_noun}"),
                compound=nc,
                id=pair.id,
            )
        )
    return transformed


def dummy_relation_probe(
    pairs: Sequence[EvalPair], matchers: Mapping[str, SemanticMatcher]
) -> EvalReport:
    return evaluate_pairs(dummy_relation_pairs(pairs), matchers)
