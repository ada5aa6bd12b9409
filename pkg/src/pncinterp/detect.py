"""Mine proper-noun-compound candidates from dependency-parsed sentences.

A candidate is a token pair (w, h) where w carries the "compound" dependency
label with h as its head, w is tagged PROPN, h is tagged NOUN, and w
immediately precedes h.  Detection is purely syntactic: mis-parsed pairs are
kept (annotation, not detection, decides non-compositionality), and chains
longer than two words contribute only the immediately-preceding modifier.
"""

from __future__ import annotations

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .types import NounCompound

logger = logging.getLogger(__name__)

ROOT_SENTINEL = -1


class ParseProviderError(Exception):
    """The provider could not parse a sentence."""


@dataclass(frozen=True)
class ParsedToken:
    text: str
    index: int
    pos: str
    head_index: int
    dep_label: str
    start_char: int

    @property
    def end_char(self) -> int:
        return self.start_char + len(self.text)


@dataclass(frozen=True)
class ParsedSentence:
    text: str
    tokens: tuple[ParsedToken, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for position, token in enumerate(self.tokens):
            if token.index != position:
                raise ValueError(f"token {token.text!r} has index {token.index}, expected {position}")
            if not (token.head_index == ROOT_SENTINEL or 0 <= token.head_index < len(self.tokens)):
                raise ValueError(f"token {token.text!r} has head_index {token.head_index} out of range")
            if self.text[token.start_char : token.end_char] != token.text:
                raise ValueError(
                    f"token {token.text!r} does not match sentence text at offset {token.start_char}"
                )


class ParseProvider(ABC):
    """Pluggable dependency parser; deterministic for a fixed version."""

    @abstractmethod
    def parse(self, sentence: str) -> ParsedSentence: ...


class FixtureParseProvider(ParseProvider):
    """Serves pre-computed parses from a JSON file, for hermetic runs.

    File schema: a JSON list of sentences, each
    ``{"text": ..., "tokens": [{"text", "pos", "head", "dep", "start"}, ...]}``
    where ``head`` is the 0-based index of the syntactic head (-1 or the
    token's own index for the root) and ``start`` the character offset.
    """

    def __init__(self, parses: dict[str, ParsedSentence]):
        self._parses = dict(parses)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureParseProvider":
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        parses = {}
        for entry in entries:
            tokens = [
                ParsedToken(
                    text=tok["text"],
                    index=i,
                    pos=tok["pos"],
                    head_index=tok["head"],
                    dep_label=tok["dep"],
                    start_char=tok["start"],
                )
                for i, tok in enumerate(entry["tokens"])
            ]
            parses[entry["text"]] = ParsedSentence(text=entry["text"], tokens=tokens)
        return cls(parses)

    def parse(self, sentence: str) -> ParsedSentence:
        try:
            return self._parses[sentence]
        except KeyError:
            raise ParseProviderError(f"no fixture parse for sentence: {sentence!r}") from None


def parsed_sentence_from_tokens(
    words: list[str], pos: list[str], heads: list[int], deps: list[str]
) -> ParsedSentence:
    """Build a ParsedSentence from parallel token lists, joined by spaces."""
    if not (len(words) == len(pos) == len(heads) == len(deps)):
        raise ValueError("token lists must have equal length")
    tokens = []
    offset = 0
    for i, word in enumerate(words):
        tokens.append(
            ParsedToken(text=word, index=i, pos=pos[i], head_index=heads[i], dep_label=deps[i], start_char=offset)
        )
        offset += len(word) + 1
    return ParsedSentence(text=" ".join(words), tokens=tokens)


def detect_pncs(parsed: ParsedSentence) -> list[NounCompound]:
    """All (PROPN, NOUN) pairs joined by an adjacent "compound" edge."""
    found = []
    tokens = parsed.tokens
    for token in tokens:
        if token.dep_label != "compound" or token.pos != "PROPN":
            continue
        if not (0 <= token.head_index < len(tokens)):
            continue
        head = tokens[token.head_index]
        if head.pos != "NOUN" or token.index + 1 != head.index:
            continue
        found.append(
            NounCompound(
                proper_noun=token.text,
                common_noun=head.text,
                sentence=parsed.text,
                span=(token.start_char, head.end_char),
            )
        )
    return found


def mine_corpus(sentences: Iterable[str], provider: ParseProvider) -> Iterator[NounCompound]:
    """Detect compounds across a sentence stream, skipping parse failures.

    No deduplication: repeated sentences yield repeated compounds.  Results
    preserve the sentence order, and within a sentence the token order.
    """
    for sentence in sentences:
        try:
            parsed = provider.parse(sentence)
        except ParseProviderError as exc:
            logger.warning("skipping unparseable sentence: %s", exc)
            continue
        yield from detect_pncs(parsed)
