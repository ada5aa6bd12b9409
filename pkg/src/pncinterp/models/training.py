"""Training configuration and the shared plumbing of the interpreter models:
input serialization with knowledge prompts, epoch batching, validation
scoring, and checkpoint directories.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator, Sequence

from ..evaluation.matchers import NgramMatcher
from ..evaluation.metrics import combined_mean
from ..knowledge import AugmentedInput, KnowledgeProvider, KnowledgeSource, stack_prompts
from ..serialize import serialize_target
from ..types import DatasetExample, Interpretation, NounCompound


class KnowledgeMismatchError(Exception):
    """An input was built with a knowledge source the model was not trained with."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters shared by all supervised models.

    The defaults are the full-scale settings (batch 16, learning rate 2e-5,
    10 epochs, 5 seeds); desk-scale runs override them.  Model selection uses
    the validation Sem/Ex-Match score under the n-gram matcher.
    """

    batch_size: int = 16
    learning_rate: float = 2e-5
    max_epochs: int = 10
    classification_weight: float = 1.0
    generation_weight: float = 1.0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self) -> None:
        if self.batch_size <= 0 or self.learning_rate <= 0 or self.max_epochs <= 0:
            raise ValueError("batch_size, learning_rate and max_epochs must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        object.__setattr__(self, "seeds", tuple(self.seeds))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["seeds"] = list(self.seeds)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        if "seeds" in data:
            data["seeds"] = tuple(data["seeds"])
        return cls(**data)


def iter_batches(n_items: int, batch_size: int, rng: random.Random) -> Iterator[list[int]]:
    """Shuffled index batches for one epoch."""
    order = list(range(n_items))
    rng.shuffle(order)
    for start in range(0, n_items, batch_size):
        yield order[start : start + batch_size]


class TrainingLog:
    """Per-epoch records, optionally mirrored to a JSON-lines file."""

    def __init__(self, path: str | Path | None = None):
        self.entries: list[dict] = []
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.write_text("", encoding="utf-8")

    def append(self, entry: dict) -> None:
        self.entries.append(entry)
        if self._path is not None:
            with self._path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(entry) + "\n")


def _as_source_tuple(
    knowledge: KnowledgeSource | Sequence[KnowledgeSource],
) -> tuple[KnowledgeSource, ...]:
    if isinstance(knowledge, KnowledgeSource):
        return (knowledge,)
    return tuple(knowledge) or (KnowledgeSource.NONE,)


class InterpreterModel:
    """Shared behavior of the supervised interpreters.

    Holds the backbone, the knowledge configuration, and the provider used to
    build prompts; subclasses implement ``train`` and ``predict``.
    """

    model_type = "abstract"

    def __init__(
        self,
        backbone,
        knowledge: KnowledgeSource | Sequence[KnowledgeSource] = KnowledgeSource.NONE,
        provider: KnowledgeProvider | None = None,
    ):
        self.backbone = backbone
        self.knowledge = _as_source_tuple(knowledge)
        self.provider = provider
        self._matcher = NgramMatcher()
        self.last_train_config: TrainConfig | None = None
        self.last_log: TrainingLog | None = None

    def input_text(self, item: DatasetExample | NounCompound | AugmentedInput | str) -> str:
        """Serialize any accepted input form to the model's input string."""
        if isinstance(item, str):
            return item
        if isinstance(item, AugmentedInput):
            extra = [s for s in item.sources if s not in self.knowledge]
            if extra:
                raise KnowledgeMismatchError(
                    f"input built with {[s.value for s in extra]} but the model was "
                    f"trained with {[s.value for s in self.knowledge]}"
                )
            return item.text
        if isinstance(item, DatasetExample):
            item = item.compound
        needs_provider = any(
            s not in (KnowledgeSource.NONE, KnowledgeSource.SENTENCE) for s in self.knowledge
        )
        if needs_provider and self.provider is None:
            raise ValueError(
                f"model uses knowledge {[s.value for s in self.knowledge]} but no provider is set"
            )
        return stack_prompts(item, list(self.knowledge), self.provider).text

    def target_text(self, example: DatasetExample) -> str:
        return serialize_target(example.compound, example.gold)

    def predict(self, item) -> Interpretation:
        raise NotImplementedError

    def validation_score(self, examples: Sequence[DatasetExample]) -> float:
        """Sem/Ex-Match of current predictions under the n-gram matcher."""
        pairs = [(example.gold, self.predict(example)) for example in examples]
        return combined_mean(pairs, self._matcher)

    def _write_meta(self, directory: Path, extra: dict | None = None) -> None:
        """Checkpoint metadata: type, knowledge, and the training snapshot."""
        meta = {
            "model_type": self.model_type,
            "knowledge": [s.value for s in self.knowledge],
            "train_config": self.last_train_config.to_dict() if self.last_train_config else None,
        }
        meta.update(extra or {})
        (directory / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
        if self.last_log is not None and self.last_log.entries:
            with (directory / "log.jsonl").open("w", encoding="utf-8") as handle:
                for entry in self.last_log.entries:
                    handle.write(json.dumps(entry) + "\n")

    @staticmethod
    def _read_meta(directory: Path) -> dict:
        return json.loads((directory / "meta.json").read_text(encoding="utf-8"))

    @staticmethod
    def _knowledge_from_meta(meta: dict) -> tuple[KnowledgeSource, ...]:
        return tuple(KnowledgeSource(value) for value in meta["knowledge"])
