"""Surface implicit compound relations in Open IE output.

The pipeline rewrites a sentence so the compound's relation becomes explicit
(via a small trained seq2seq), re-extracts, aligns the new extractions with
the originals, and applies a high-precision rewrite rule: when an original
object starts with the compound and the integrated object moves the proper
noun off the front, the moved words join the relation.  Example:

    (Workers; sound alarm on; COVID-19 outbreak)
    + "Workers sound alarm on outbreak of COVID-19"
    -> (Workers; sound alarm on outbreak of; COVID-19)

The approach is agnostic to the Open IE system; clients plug in.
"""

from __future__ import annotations

import json
import logging
import random
import subprocess
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import httpx

from .detect import ParseProvider, ParseProviderError, detect_pncs
from .knowledge import SEP
from .models.backbones import load_backbone
from .models.training import InterpreterModel, TrainConfig, TrainingLog, iter_batches
from .evaluation.matchers import NgramMatcher, tokenize
from .types import DatasetExample, Interpretation, NounCompound, Paraphrase, is_compositional

logger = logging.getLogger(__name__)

PROVENANCE_ORIGINAL = "original"
PROVENANCE_AUGMENTED = "augmented"


class OpenIEClientError(Exception):
    """The extraction backend failed on a sentence."""


class CompoundNotInSentenceError(Exception):
    """integrate() was given a sentence that does not contain the compound."""


@dataclass(frozen=True)
class Extraction:
    """A (subject; relation; object) triple with its provenance."""

    subject: str
    relation: str
    object: str
    source_sentence: str = ""
    provenance: str = PROVENANCE_ORIGINAL

    def __post_init__(self) -> None:
        for name in ("subject", "relation", "object"):
            if not getattr(self, name).strip():
                raise ValueError(f"extraction {name} must be non-empty")

    def triple(self) -> tuple[str, str, str]:
        return (self.subject, self.relation, self.object)


class OpenIEClient(ABC):
    @abstractmethod
    def extract(self, sentence: str) -> list[Extraction]: ...


class FixtureOpenIEClient(OpenIEClient):
    """Extractions from a JSON map ``{sentence: [[subj, rel, obj], ...]}``."""

    def __init__(self, table: dict[str, list]):
        self._table = dict(table)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureOpenIEClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def extract(self, sentence: str) -> list[Extraction]:
        if sentence not in self._table:
            return []
        return [
            Extraction(subject=s, relation=r, object=o, source_sentence=sentence)
            for s, r, o in self._table[sentence]
        ]


class HttpOpenIEClient(OpenIEClient):
    """POSTs {"sentence"} to an extraction service returning
    {"extractions": [{"subject", "relation", "object"}, ...]}."""

    def __init__(self, url: str, timeout: float = 30.0, transport: httpx.BaseTransport | None = None):
        self._url = url
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def extract(self, sentence: str) -> list[Extraction]:
        try:
            response = self._client.post(self._url, json={"sentence": sentence})
        except httpx.HTTPError as exc:
            raise OpenIEClientError(f"extraction service unreachable: {exc}") from exc
        if response.status_code != 200:
            raise OpenIEClientError(f"extraction service returned HTTP {response.status_code}")
        return [
            Extraction(
                subject=item["subject"],
                relation=item["relation"],
                object=item["object"],
                source_sentence=sentence,
            )
            for item in response.json()["extractions"]
        ]


class SubprocessOpenIEClient(OpenIEClient):
    """Runs ``command... <sentence>`` and reads a JSON list of triples."""

    def __init__(self, command: Sequence[str]):
        self._command = list(command)

    def extract(self, sentence: str) -> list[Extraction]:
        try:
            result = subprocess.run(
                self._command + [sentence], capture_output=True, text=True, check=True
            )
            triples = json.loads(result.stdout)
        except (subprocess.SubprocessError, OSError, json.JSONDecodeError) as exc:
            raise OpenIEClientError(f"extractor subprocess failed: {exc}") from exc
        return [
            Extraction(subject=s, relation=r, object=o, source_sentence=sentence)
            for s, r, o in triples
        ]


@dataclass(frozen=True)
class IntegrationExample:
    """Training pair for the integration model."""

    sentence: str
    interpretation: Paraphrase
    target: str

    def __post_init__(self) -> None:
        if not self.sentence.strip() or not self.target.strip():
            raise ValueError("sentence and target must be non-empty")


@dataclass(frozen=True)
class IntegrationResult:
    """An integrated sentence; low-confidence outputs (the proper noun went
    missing) are skipped downstream."""

    text: str
    low_confidence: bool = False


class IntegrationModel(InterpreterModel):
    """Seq2seq that rewrites a sentence to make the compound relation explicit.

    Input is ``"<sentence> [SEP] <interpretation>"``; output is the rewritten
    sentence.  Model selection uses the mean n-gram score against the target
    (on the validation pairs when given, else on the training pairs: the task
    is close to copying, so this stays meaningful at 200-example scale).
    """

    model_type = "integration"

    @staticmethod
    def serialize_input(sentence: str, interpretation: Paraphrase) -> str:
        return f"{sentence} {SEP} {interpretation.text}"

    def train(
        self,
        examples: Sequence[IntegrationExample],
        config: TrainConfig = TrainConfig(),
        val_examples: Sequence[IntegrationExample] | None = None,
        seed: int = 0,
        log_path: str | Path | None = None,
    ) -> TrainingLog:
        if not examples:
            raise ValueError("training set is empty")
        inputs = [self.serialize_input(e.sentence, e.interpretation) for e in examples]
        targets = [e.target for e in examples]
        self.backbone.prepare(inputs + targets)
        self.backbone.begin_training(config.learning_rate)
        held_out = val_examples if val_examples else examples

        matcher = NgramMatcher()

        def score() -> float:
            total = 0.0
            for example in held_out:
                generated = self.backbone.generate(self.serialize_input(example.sentence, example.interpretation))
                total += matcher.match(example.target, generated) if generated else 0.0
            return total / len(held_out)

        log = TrainingLog(log_path)
        rng = random.Random(seed)
        best_score, best_state = float("-inf"), None
        for epoch in range(1, config.max_epochs + 1):
            losses = []
            for batch in iter_batches(len(inputs), config.batch_size, rng):
                losses.append(self.backbone.train_step([(inputs[i], targets[i]) for i in batch]))
            epoch_score = score()
            selected = epoch_score > best_score
            if selected:
                best_score, best_state = epoch_score, self.backbone.snapshot()
            log.append(
                {"epoch": epoch, "train_loss": sum(losses) / len(losses), "val_ngram": epoch_score, "selected": selected}
            )
        self.backbone.restore(best_state)
        self.last_train_config, self.last_log = config, log
        return log

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self._write_meta(directory)
        self.backbone.save(directory / "backbone")

    @classmethod
    def load(cls, directory: str | Path) -> "IntegrationModel":
        directory = Path(directory)
        meta = cls._read_meta(directory)
        if meta["model_type"] != cls.model_type:
            raise ValueError(f"checkpoint is a {meta['model_type']} model, not {cls.model_type}")
        return cls(load_backbone(directory / "backbone"))


def train_integration_model(
    examples: Sequence[IntegrationExample],
    config: TrainConfig,
    backbone,
    val_examples: Sequence[IntegrationExample] | None = None,
    seed: int = 0,
) -> IntegrationModel:
    model = IntegrationModel(backbone)
    model.train(examples, config=config, val_examples=val_examples, seed=seed)
    return model


def integrate(
    sentence: str,
    interpretation: Paraphrase,
    model: IntegrationModel,
    nc: NounCompound | None = None,
) -> IntegrationResult:
    """Rewrite ``sentence`` according to the compound's interpretation.

    The compound (taken from ``nc`` or from the paraphrase's first two
    tokens) must occur in the sentence.  Outputs that lost the proper noun
    are flagged low-confidence.
    """
    if nc is not None:
        proper, compound_text = nc.proper_noun, nc.text
    else:
        tokens = interpretation.text.split()
        if len(tokens) < 2:
            raise ValueError(f"cannot infer a compound from {interpretation.text!r}")
        proper, compound_text = tokens[0], f"{tokens[0]} {tokens[1]}"
    if compound_text not in sentence:
        raise CompoundNotInSentenceError(f"{compound_text!r} does not occur in {sentence!r}")
    text = model.backbone.generate(model.serialize_input(sentence, interpretation))
    return IntegrationResult(text=text, low_confidence=proper not in text.split())


def postprocess(original: Extraction, integrated: Extraction, pnc: NounCompound) -> Extraction | None:
    """The high-precision rewrite rule; None when the guard fails.

    Applies only when the original object starts with the compound (exact
    token match) and the integrated object contains the proper noun somewhere
    past its start.  The integrated-object words before the proper noun move
    into the relation; the object becomes the proper noun and what follows.
    """
    obj_tokens = original.object.split()
    if len(obj_tokens) < 2 or (obj_tokens[0], obj_tokens[1]) != (pnc.proper_noun, pnc.common_noun):
        return None
    integrated_tokens = integrated.object.split()
    if pnc.proper_noun not in integrated_tokens:
        return None
    position = integrated_tokens.index(pnc.proper_noun)
    if position == 0:
        return None
    return Extraction(
        subject=original.subject,
        relation=f"{integrated.relation} {' '.join(integrated_tokens[:position])}",
        object=" ".join(integrated_tokens[position:]),
        source_sentence=original.source_sentence,
        provenance=PROVENANCE_AUGMENTED,
    )


def make_detector(provider: ParseProvider) -> Callable[[str], list[NounCompound]]:
    def detector(sentence: str) -> list[NounCompound]:
        return detect_pncs(provider.parse(sentence))

    return detector


def make_integrator(model: IntegrationModel) -> Callable[[str, Paraphrase, NounCompound], IntegrationResult]:
    def integrator(sentence: str, interpretation: Paraphrase, nc: NounCompound) -> IntegrationResult:
        return integrate(sentence, interpretation, model, nc=nc)

    return integrator


@dataclass
class YieldReport:
    n_sentences: int = 0
    n_sentences_with_pnc: int = 0
    n_original: int = 0
    n_augmented: int = 0
    n_skipped_non_compositional: int = 0
    n_low_confidence: int = 0
    n_sentence_errors: int = 0

    @property
    def yield_increase_pct(self) -> float:
        if self.n_original == 0:
            return 0.0
        return 100.0 * self.n_augmented / self.n_original

    def to_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "n_sentences_with_pnc": self.n_sentences_with_pnc,
            "n_original_extractions": self.n_original,
            "n_augmented_extractions": self.n_augmented,
            "yield_increase_pct": self.yield_increase_pct,
            "n_skipped_non_compositional": self.n_skipped_non_compositional,
            "n_low_confidence": self.n_low_confidence,
            "n_sentence_errors": self.n_sentence_errors,
        }


def _relation_overlap(a: str, b: str) -> int:
    return len(set(tokenize(a)) & set(tokenize(b)))


def augment_corpus(
    sentences: Iterable[str],
    client: OpenIEClient,
    detector: Callable[[str], list[NounCompound]],
    interpreter: Callable[[NounCompound], Interpretation],
    integrator: Callable[[str, Paraphrase, NounCompound], IntegrationResult],
) -> tuple[list[Extraction], YieldReport]:
    """Run the full pipeline over a corpus.

    Every original extraction is kept; augmented extractions are appended
    after their sentence's originals.  Component failures skip the sentence
    (with a log entry) and the run continues.  Each detected compound in a
    sentence is processed as its own integration pass against the original
    sentence.
    """
    output: list[Extraction] = []
    report = YieldReport()
    for sentence in sentences:
        report.n_sentences += 1
        try:
            originals = client.extract(sentence)
            output.extend(originals)
            report.n_original += len(originals)
            pncs = detector(sentence)
            if pncs:
                report.n_sentences_with_pnc += 1
            for pnc in pncs:
                interpretation = interpreter(pnc)
                if not is_compositional(interpretation):
                    report.n_skipped_non_compositional += 1
                    continue
                result = integrator(sentence, interpretation, pnc)
                if result.low_confidence:
                    report.n_low_confidence += 1
                    continue
                integrated_exts = client.extract(result.text)
                for original in originals:
                    obj_tokens = original.object.split()
                    if len(obj_tokens) < 2 or (obj_tokens[0], obj_tokens[1]) != (
                        pnc.proper_noun,
                        pnc.common_noun,
                    ):
                        continue
                    candidates = [e for e in integrated_exts if e.subject == original.subject]
                    if not candidates:
                        continue
                    best = max(candidates, key=lambda e: (_relation_overlap(e.relation, original.relation)))
                    augmented = postprocess(original, best, pnc)
                    if augmented is not None:
                        output.append(augmented)
                        report.n_augmented += 1
        except (OpenIEClientError, ParseProviderError, CompoundNotInSentenceError, ValueError) as exc:
            logger.warning("skipping sentence %r: %s", sentence, exc)
            report.n_sentence_errors += 1
    return output, report


def save_extractions(extractions: Iterable[Extraction], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for extraction in extractions:
            record = {
                "subject": extraction.subject,
                "relation": extraction.relation,
                "object": extraction.object,
                "sentence": extraction.source_sentence,
                "provenance": extraction.provenance,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_extractions(path: str | Path) -> list[Extraction]:
    extractions = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            extractions.append(
                Extraction(
                    subject=record["subject"],
                    relation=record["relation"],
                    object=record["object"],
                    source_sentence=record.get("sentence", ""),
                    provenance=record.get("provenance", PROVENANCE_ORIGINAL),
                )
            )
    return extractions


def sample_for_audit(
    extractions: Sequence[Extraction], k: int = 500, seed: int = 0, provenance: str = PROVENANCE_AUGMENTED
) -> list[Extraction]:
    """A reproducible random sample for manual precision judging."""
    pool = [e for e in extractions if e.provenance == provenance]
    if len(pool) <= k:
        return list(pool)
    return random.Random(seed).sample(pool, k)


def article_drop_rewrite(example: DatasetExample) -> IntegrationExample | None:
    """Derive a starter integration pair from a compositional example.

    Rewrites the compound in its sentence as the paraphrase continuation with
    the copula and any leading article dropped: "Covid-19 outbreak is an
    outbreak of Covid-19" turns "... on Covid-19 outbreak" into "... on
    outbreak of Covid-19".  Real annotation should replace these pairs; they
    exist so the integration model has a documented, runnable data format.
    """
    if not is_compositional(example.gold):
        return None
    nc = example.compound
    continuation = example.gold.text[len(nc.text) :].split()
    if not continuation or continuation[0] not in ("is", "are"):
        return None
    rest = continuation[1:]
    if rest and rest[0] in ("a", "an", "the"):
        rest = rest[1:]
    if not rest:
        return None
    rewritten = nc.sentence[: nc.span[0]] + " ".join(rest) + nc.sentence[nc.span[1] :]
    return IntegrationExample(sentence=nc.sentence, interpretation=example.gold, target=rewritten)


def starter_integration_examples(examples: Iterable[DatasetExample]) -> list[IntegrationExample]:
    pairs = []
    for example in examples:
        pair = article_drop_rewrite(example)
        if pair is not None:
            pairs.append(pair)
    return pairs
