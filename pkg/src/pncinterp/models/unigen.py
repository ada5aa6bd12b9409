"""The unified text-to-text interpreter.

One sequence-to-sequence model handles both subtasks: it generates the
paraphrase for compositional compounds and the non-compositionality sentinel
sentence otherwise.  Predictions are parsed back into interpretations by the
sentinel rule.
"""

from __future__ import annotations

import random
from pathlib import Path

from ..knowledge import KnowledgeProvider
from ..serialize import parse_output
from ..types import DatasetExample, Interpretation, NounCompound
from .backbones import load_backbone
from .training import InterpreterModel, TrainConfig, TrainingLog, iter_batches


class UniGenModel(InterpreterModel):
    model_type = "unigen"

    def train(
        self,
        train_examples: list[DatasetExample],
        val_examples: list[DatasetExample],
        config: TrainConfig = TrainConfig(),
        seed: int = 0,
        log_path: str | Path | None = None,
    ) -> TrainingLog:
        """Fit on the training split, selecting the epoch with the best
        validation Sem/Ex-Match score.  Deterministic for a fixed seed and a
        deterministic backbone."""
        if not train_examples:
            raise ValueError("training set is empty")
        if not val_examples:
            raise ValueError("validation set is empty")
        inputs = [self.input_text(e) for e in train_examples]
        targets = [self.target_text(e) for e in train_examples]
        self.backbone.prepare(inputs + targets)
        self.backbone.begin_training(config.learning_rate)

        log = TrainingLog(log_path)
        rng = random.Random(seed)
        best_score, best_state = float("-inf"), None
        for epoch in range(1, config.max_epochs + 1):
            losses = []
            for batch in iter_batches(len(inputs), config.batch_size, rng):
                losses.append(self.backbone.train_step([(inputs[i], targets[i]) for i in batch]))
            score = self.validation_score(val_examples)
            selected = score > best_score
            if selected:
                best_score, best_state = score, self.backbone.snapshot()
            log.append(
                {
                    "epoch": epoch,
                    "train_loss": sum(losses) / len(losses),
                    "val_sem_ex": score,
                    "selected": selected,
                }
            )
        self.backbone.restore(best_state)
        self.last_train_config, self.last_log = config, log
        return log

    def predict(self, item: DatasetExample | NounCompound | str) -> Interpretation:
        nc = item.compound if isinstance(item, DatasetExample) else item
        generated = self.backbone.generate(self.input_text(item))
        if isinstance(nc, str):
            # Raw-text inputs carry no compound; parse against a placeholder.
            nc = NounCompound("X", "y", "X y", (0, 3))
        return parse_output(nc, generated)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self._write_meta(directory)
        self.backbone.save(directory / "backbone")

    @classmethod
    def load(cls, directory: str | Path, provider: KnowledgeProvider | None = None) -> "UniGenModel":
        directory = Path(directory)
        meta = cls._read_meta(directory)
        if meta["model_type"] != cls.model_type:
            raise ValueError(f"checkpoint is a {meta['model_type']} model, not {cls.model_type}")
        backbone = load_backbone(directory / "backbone")
        return cls(backbone, knowledge=cls._knowledge_from_meta(meta), provider=provider)
