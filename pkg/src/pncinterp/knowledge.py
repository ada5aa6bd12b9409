"""Knowledge-augmented model inputs.

Four knowledge sources can be prepended to a compound, each separated by a
``[SEP]`` token: the source sentence, a dictionary gloss of the common noun,
an encyclopedia summary of the proper noun, and the proper noun's named-entity
category.  Sources can also be stacked.  When a provider has no answer for a
compound the prompt falls back to the bare-compound form.
"""

from __future__ import annotations

import json
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import httpx

from .types import NounCompound

SEP = "[SEP]"
SEGMENT_JOINER = f" {SEP} "

# Knowledge segments are capped to keep prompts inside backbone context
# limits; only long encyclopedia paragraphs hit this in practice.
MAX_KNOWLEDGE_TOKENS = 256


class KnowledgeSource(Enum):
    NONE = "none"
    SENTENCE = "sentence"
    WORDNET_NN = "wordnet-nn"
    WIKI_NNP = "wiki-nnp"
    NER_NNP = "ner-nnp"


class ProviderError(Exception):
    """Transport or configuration failure, distinct from an absent answer."""


class KnowledgeProvider(ABC):
    """Lookup interface for the three non-trivial knowledge sources.

    Each method returns ``None`` when the entity or word is simply unknown;
    transport failures raise :class:`ProviderError` instead.
    """

    @abstractmethod
    def gloss(self, common_noun: str) -> str | None: ...

    @abstractmethod
    def wiki_summary(self, proper_noun: str, sentence: str) -> str | None: ...

    @abstractmethod
    def ner_category(self, proper_noun: str, sentence: str) -> str | None: ...


# OntoNotes-style entity tags mapped to human-readable descriptions used in
# the NER prompt. Providers may also return a description directly.
NER_TAG_DESCRIPTIONS = {
    "PERSON": "people, including fictional",
    "NORP": "nationalities or religious groups",
    "FAC": "buildings, airports, highways or bridges",
    "ORG": "companies, agencies or institutions",
    "GPE": "countries, cities or states",
    "LOC": "non-political locations, mountain ranges or bodies of water",
    "PRODUCT": "objects, vehicles or foods",
    "EVENT": "named hurricanes, battles, wars or sports events",
    "WORK_OF_ART": "titles of books, songs or other works",
    "LAW": "named documents made into laws",
    "LANGUAGE": "named languages",
    "DATE": "absolute or relative dates or periods",
    "TIME": "times smaller than a day",
    "MONEY": "monetary values",
    "QUANTITY": "measurements",
    "ORDINAL": "ordinal numbers",
    "CARDINAL": "other numerals",
}


def describe_ner_tag(tag: str) -> str:
    return NER_TAG_DESCRIPTIONS.get(tag, tag)


@dataclass(frozen=True)
class AugmentedInput:
    """A serialized model input: knowledge segments, then the compound.

    ``sources`` lists the sources that actually contributed a segment, in
    order; an input that fell back to the bare compound has no sources.
    Splitting the text on the separator always recovers the compound as the
    final segment.
    """

    text: str
    sources: tuple[KnowledgeSource, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))


def _truncate(text: str, max_tokens: int = MAX_KNOWLEDGE_TOKENS) -> str:
    tokens = text.split()
    if len(tokens) <= max_tokens:
        return text
    return " ".join(tokens[:max_tokens])


def _segment(
    nc: NounCompound, source: KnowledgeSource, provider: KnowledgeProvider | None
) -> str | None:
    if source is KnowledgeSource.NONE:
        return None
    if source is KnowledgeSource.SENTENCE:
        return _truncate(nc.sentence)
    if provider is None:
        raise ValueError(f"knowledge source {source.value} requires a provider")
    if source is KnowledgeSource.WORDNET_NN:
        gloss = provider.gloss(nc.common_noun)
        return None if gloss is None else f"{nc.common_noun} meaning: {_truncate(gloss)}"
    if source is KnowledgeSource.WIKI_NNP:
        summary = provider.wiki_summary(nc.proper_noun, nc.sentence)
        return None if summary is None else f"{nc.proper_noun} meaning: {_truncate(summary)}"
    if source is KnowledgeSource.NER_NNP:
        category = provider.ner_category(nc.proper_noun, nc.sentence)
        return None if category is None else f"{nc.proper_noun} belongs to {describe_ner_tag(category)}"
    raise ValueError(f"unknown knowledge source {source!r}")


def build_prompt(
    nc: NounCompound,
    source: KnowledgeSource = KnowledgeSource.NONE,
    provider: KnowledgeProvider | None = None,
) -> AugmentedInput:
    """Serialize one compound with one knowledge source.

    An absent provider answer degrades to the bare-compound form, identical
    to ``build_prompt(nc, KnowledgeSource.NONE)``.
    """
    return stack_prompts(nc, [source], provider)


def stack_prompts(
    nc: NounCompound,
    sources: list[KnowledgeSource],
    provider: KnowledgeProvider | None = None,
) -> AugmentedInput:
    """Concatenate several knowledge segments in order, compound last."""
    if not sources:
        raise ValueError("at least one knowledge source is required")
    segments: list[str] = []
    contributed: list[KnowledgeSource] = []
    for source in sources:
        segment = _segment(nc, source, provider)
        if segment is not None:
            segments.append(segment)
            contributed.append(source)
    text = SEGMENT_JOINER.join(segments + [nc.text])
    return AugmentedInput(text=text, sources=tuple(contributed))


class FixtureKnowledgeProvider(KnowledgeProvider):
    """Answers from in-memory (or JSON file) maps, for hermetic tests.

    File schema: ``{"gloss": {noun: text}, "wiki": {noun: text},
    "ner": {noun: tag-or-description}}``.
    """

    def __init__(
        self,
        gloss: dict[str, str] | None = None,
        wiki: dict[str, str] | None = None,
        ner: dict[str, str] | None = None,
    ):
        self._gloss = gloss or {}
        self._wiki = wiki or {}
        self._ner = ner or {}

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureKnowledgeProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(gloss=data.get("gloss"), wiki=data.get("wiki"), ner=data.get("ner"))

    def gloss(self, common_noun: str) -> str | None:
        return self._gloss.get(common_noun)

    def wiki_summary(self, proper_noun: str, sentence: str) -> str | None:
        return self._wiki.get(proper_noun)

    def ner_category(self, proper_noun: str, sentence: str) -> str | None:
        return self._ner.get(proper_noun)


class KnowledgeCache:
    """Thread-safe (kind, query) -> answer cache, persistable as JSON.

    Absent answers are cached too, so a miss is never re-fetched within a
    run.
    """

    def __init__(self) -> None:
        self._store: dict[str, dict[str, str | None]] = {}
        self._lock = threading.Lock()

    def get(self, kind: str, query: str) -> tuple[bool, str | None]:
        with self._lock:
            bucket = self._store.get(kind)
            if bucket is None or query not in bucket:
                return False, None
            return True, bucket[query]

    def put(self, kind: str, query: str, value: str | None) -> None:
        with self._lock:
            self._store.setdefault(kind, {})[query] = value

    def save(self, path: str | Path) -> None:
        with self._lock:
            payload = json.dumps(self._store, ensure_ascii=False, indent=0)
        Path(path).write_text(payload + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeCache":
        cache = cls()
        cache._store = json.loads(Path(path).read_text(encoding="utf-8"))
        return cache


class CachingKnowledgeProvider(KnowledgeProvider):
    """Cache-through wrapper: identical queries hit the inner provider once."""

    def __init__(self, inner: KnowledgeProvider, cache: KnowledgeCache | None = None):
        self.inner = inner
        self.cache = cache if cache is not None else KnowledgeCache()

    def _through(self, kind: str, query: str, fetch) -> str | None:
        hit, value = self.cache.get(kind, query)
        if hit:
            return value
        value = fetch()
        self.cache.put(kind, query, value)
        return value

    def gloss(self, common_noun: str) -> str | None:
        return self._through("gloss", common_noun, lambda: self.inner.gloss(common_noun))

    def wiki_summary(self, proper_noun: str, sentence: str) -> str | None:
        return self._through("wiki", proper_noun, lambda: self.inner.wiki_summary(proper_noun, sentence))

    def ner_category(self, proper_noun: str, sentence: str) -> str | None:
        return self._through("ner", proper_noun, lambda: self.inner.ner_category(proper_noun, sentence))


class WikipediaSummaryClient:
    """First-paragraph summaries from a Wikipedia-style REST API.

    Links by exact-title lookup first, then by taking the top search result.
    Unlinkable entities return ``None``; HTTP failures raise
    :class:`ProviderError`.
    """

    def __init__(
        self,
        rest_base: str = "https://en.wikipedia.org/api/rest_v1",
        api_base: str = "https://en.wikipedia.org/w/api.php",
        timeout: float = 10.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self._rest_base = rest_base.rstrip("/")
        self._api_base = api_base
        self._client = httpx.Client(timeout=timeout, transport=transport, follow_redirects=True)

    def _lookup(self, title: str) -> str | None:
        quoted = urllib.parse.quote(title, safe="")
        try:
            response = self._client.get(f"{self._rest_base}/page/summary/{quoted}")
        except httpx.HTTPError as exc:
            raise ProviderError(f"summary lookup failed for {title!r}: {exc}") from exc
        if response.status_code == 404:
            return None
        if response.status_code != 200:
            raise ProviderError(f"summary lookup for {title!r} returned HTTP {response.status_code}")
        return response.json().get("extract") or None

    def _search_top(self, query: str) -> str | None:
        params = {"action": "opensearch", "search": query, "limit": "1", "format": "json"}
        try:
            response = self._client.get(self._api_base, params=params)
        except httpx.HTTPError as exc:
            raise ProviderError(f"search failed for {query!r}: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(f"search for {query!r} returned HTTP {response.status_code}")
        titles = response.json()[1]
        return titles[0] if titles else None

    def summary(self, proper_noun: str) -> str | None:
        extract = self._lookup(proper_noun)
        if extract is not None:
            return extract
        title = self._search_top(proper_noun)
        if title is None or title == proper_noun:
            return None
        return self._lookup(title)


class WebKnowledgeProvider(KnowledgeProvider):
    """Online provider: Wikipedia summaries plus optional gloss/NER backends.

    The gloss backend needs the ``nltk`` WordNet corpus and the NER backend a
    spaCy pipeline; both are imported lazily and raise :class:`ProviderError`
    with an install hint when unavailable.
    """

    def __init__(
        self,
        wiki_client: WikipediaSummaryClient | None = None,
        spacy_model: str = "en_core_web_sm",
    ):
        self._wiki = wiki_client or WikipediaSummaryClient()
        self._spacy_model = spacy_model
        self._nlp = None

    def gloss(self, common_noun: str) -> str | None:
        try:
            from nltk.corpus import wordnet
        except ImportError as exc:
            raise ProviderError("gloss lookup needs nltk with the WordNet corpus installed") from exc
        try:
            synsets = wordnet.synsets(common_noun, pos="n")
        except LookupError as exc:
            raise ProviderError("WordNet corpus missing; run nltk.download('wordnet')") from exc
        if not synsets:
            return None
        # First listed sense: the most frequent one.
        return synsets[0].definition()

    def wiki_summary(self, proper_noun: str, sentence: str) -> str | None:
        return self._wiki.summary(proper_noun)

    def ner_category(self, proper_noun: str, sentence: str) -> str | None:
        if self._nlp is None:
            try:
                import spacy
            except ImportError as exc:
                raise ProviderError("NER tagging needs spacy with a pipeline installed") from exc
            try:
                self._nlp = spacy.load(self._spacy_model)
            except OSError as exc:
                raise ProviderError(f"spaCy model {self._spacy_model!r} is not installed") from exc
        doc = self._nlp(sentence)
        for ent in doc.ents:
            if proper_noun in ent.text.split():
                return ent.label_
        return None
