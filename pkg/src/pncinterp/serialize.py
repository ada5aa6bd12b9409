"""Text form of interpretations for text-to-text models.

Compositional targets are the full paraphrase sentence; non-compositional
targets are the sentinel sentence ``"<compound> is non-compositional"``.
Parsing accepts the sentinel with either "non-compositional" or "not
compositional", case-insensitively, since generators reproduce both.
"""

from __future__ import annotations

import logging

from .types import NON_COMPOSITIONAL, Interpretation, NounCompound, Paraphrase, is_compositional

logger = logging.getLogger(__name__)

NON_COMPOSITIONAL_SUFFIX = "is non-compositional"
_SENTINEL_SUFFIXES = ("is non-compositional", "is not compositional")


def serialize_target(nc: NounCompound, gold: Interpretation) -> str:
    """The training target string for one example."""
    if is_compositional(gold):
        return gold.text
    return f"{nc.text} {NON_COMPOSITIONAL_SUFFIX}"


def parse_output(nc: NounCompound, generated: str) -> Interpretation:
    """Interpret a generated string; inverse of :func:`serialize_target`.

    Empty generations count as non-compositional (logged, since they usually
    mean an undertrained model rather than a real prediction).
    """
    normalized = " ".join(generated.split()).lower()
    if not normalized:
        logger.warning("empty generation for %r treated as non-compositional", nc.text)
        return NON_COMPOSITIONAL
    if any(normalized.endswith(suffix) for suffix in _SENTINEL_SUFFIXES):
        return NON_COMPOSITIONAL
    return Paraphrase(generated.strip())
