"""The multi-task interpreter: classify, then generate.

A two-logit MLP head over the max-pooled encoder states decides whether the
compound is compositional; the decoder is only invoked (and only trained) for
compositional cases.  Classification and generation losses are jointly
optimized with configurable weights.
"""

from __future__ import annotations

import copy
import logging
import random
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..knowledge import KnowledgeProvider
from ..types import NON_COMPOSITIONAL, DatasetExample, Interpretation, NounCompound, Paraphrase, is_compositional
from .backbones import TorchBackbone, load_backbone
from .training import InterpreterModel, TrainConfig, TrainingLog, iter_batches

logger = logging.getLogger(__name__)

CMP_CLASS, NONCMP_CLASS = 0, 1

# Head-only fitting steps per epoch for backbones without differentiable
# encoders (the echo oracle); its features are linearly separable.
_HEAD_ONLY_STEPS = 100
_HEAD_ONLY_LR = 0.1


class ClassifierHead(nn.Module):
    """Two-logit MLP over a pooled encoder vector."""

    def __init__(self, input_dim: int, hidden_dim: int = 64):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(input_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, 2),
        )

    def forward(self, pooled: torch.Tensor) -> torch.Tensor:
        return self.net(pooled)


def max_pool_states(states: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Max over sequence positions, ignoring padding.

    Invariant under any permutation of the (unmasked) positions.
    """
    filled = states.masked_fill(~mask.unsqueeze(-1), float("-inf"))
    return filled.max(dim=1).values


class MtGenModel(InterpreterModel):
    model_type = "mtgen"

    def __init__(self, backbone, knowledge=None, provider: KnowledgeProvider | None = None, head_hidden: int = 64):
        from ..knowledge import KnowledgeSource

        super().__init__(backbone, knowledge if knowledge is not None else KnowledgeSource.NONE, provider)
        self.head_hidden = head_hidden
        self.head: ClassifierHead | None = None

    def _init_head(self, seed: int) -> None:
        torch.manual_seed(seed)
        self.head = ClassifierHead(self.backbone.encoder_dim, self.head_hidden)

    def _require_head(self) -> ClassifierHead:
        if self.head is None:
            raise ValueError("model has no classifier head: train it or load a checkpoint")
        return self.head

    @staticmethod
    def _labels(examples: list[DatasetExample]) -> list[int]:
        return [CMP_CLASS if is_compositional(e.gold) else NONCMP_CLASS for e in examples]

    def train(
        self,
        train_examples: list[DatasetExample],
        val_examples: list[DatasetExample],
        config: TrainConfig = TrainConfig(),
        seed: int = 0,
        log_path: str | Path | None = None,
    ) -> TrainingLog:
        if not train_examples:
            raise ValueError("training set is empty")
        if not val_examples:
            raise ValueError("validation set is empty")
        inputs = [self.input_text(e) for e in train_examples]
        targets = [self.target_text(e) for e in train_examples]
        labels = self._labels(train_examples)
        self.backbone.prepare(inputs + targets)
        self.backbone.begin_training(config.learning_rate)
        self._init_head(seed)

        if isinstance(self.backbone, TorchBackbone):
            epoch_fn = self._joint_epoch_fn(inputs, targets, labels, config)
        else:
            epoch_fn = self._frozen_epoch_fn(inputs, targets, labels, config)

        log = TrainingLog(log_path)
        rng = random.Random(seed)
        best_score, best_state = float("-inf"), None
        for epoch in range(1, config.max_epochs + 1):
            train_loss = epoch_fn(rng)
            score = self.validation_score(val_examples)
            selected = score > best_score
            if selected:
                best_score = score
                best_state = (self.backbone.snapshot(), copy.deepcopy(self.head.state_dict()))
            log.append({"epoch": epoch, "train_loss": train_loss, "val_sem_ex": score, "selected": selected})
        self.backbone.restore(best_state[0])
        self.head.load_state_dict(best_state[1])
        self.last_train_config, self.last_log = config, log
        return log

    def _joint_epoch_fn(self, inputs, targets, labels, config: TrainConfig):
        """Joint optimization: classification on all items, generation on the
        compositional ones, losses summed with the configured weights."""
        head = self._require_head()
        optimizer = torch.optim.Adam(
            list(self.backbone.torch_module.parameters()) + list(head.parameters()),
            lr=config.learning_rate,
        )

        def run_epoch(rng: random.Random) -> float:
            losses = []
            for batch in iter_batches(len(inputs), config.batch_size, rng):
                optimizer.zero_grad()
                batch_inputs = [inputs[i] for i in batch]
                states, mask = self.backbone.encode_batch(batch_inputs)
                logits = head(max_pool_states(states, mask))
                label_tensor = torch.tensor([labels[i] for i in batch], dtype=torch.long)
                loss = config.classification_weight * nn.functional.cross_entropy(logits, label_tensor)
                cmp_batch = [i for i in batch if labels[i] == CMP_CLASS]
                if cmp_batch:
                    gen_loss = self.backbone.generation_loss(
                        [inputs[i] for i in cmp_batch], [targets[i] for i in cmp_batch]
                    )
                    loss = loss + config.generation_weight * gen_loss
                loss.backward()
                optimizer.step()
                losses.append(float(loss.detach()))
            return sum(losses) / len(losses)

        return run_epoch

    def _frozen_epoch_fn(self, inputs, targets, labels, config: TrainConfig):
        """For non-differentiable backbones: let the backbone memorize the
        compositional pairs, then fit the head on its fixed features."""
        head = self._require_head()
        optimizer = torch.optim.Adam(head.parameters(), lr=_HEAD_ONLY_LR)
        label_tensor = torch.tensor(labels, dtype=torch.long)

        def run_epoch(rng: random.Random) -> float:
            cmp_pairs = [(x, y) for x, y, label in zip(inputs, targets, labels) if label == CMP_CLASS]
            if cmp_pairs:
                self.backbone.train_step(cmp_pairs)
            features = torch.tensor(
                np.stack([self.backbone.encode(text).max(axis=0) for text in inputs]),
                dtype=torch.float32,
            )
            loss_value = 0.0
            for _ in range(_HEAD_ONLY_STEPS):
                optimizer.zero_grad()
                loss = nn.functional.cross_entropy(head(features), label_tensor)
                loss.backward()
                optimizer.step()
                loss_value = float(loss.detach())
            return loss_value

        return run_epoch

    def classify(self, item) -> int:
        """Head decision for one input: CMP_CLASS or NONCMP_CLASS."""
        head = self._require_head()
        features = self.backbone.encode(self.input_text(item))
        pooled = torch.tensor(features.max(axis=0), dtype=torch.float32).unsqueeze(0)
        with torch.no_grad():
            logits = head(pooled)
        return int(logits.argmax())

    def predict(self, item: DatasetExample | NounCompound | str) -> Interpretation:
        if self.classify(item) == NONCMP_CLASS:
            return NON_COMPOSITIONAL
        generated = self.backbone.generate(self.input_text(item))
        if not generated.strip():
            nc = item.compound if isinstance(item, DatasetExample) else item
            name = nc.text if isinstance(nc, NounCompound) else str(nc)
            logger.warning("empty generation for %r despite compositional classification", name)
            return NON_COMPOSITIONAL
        return Paraphrase(generated.strip())

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self._write_meta(directory, {"head_hidden": self.head_hidden})
        self.backbone.save(directory / "backbone")
        torch.save(self._require_head().state_dict(), directory / "head.pt")

    @classmethod
    def load(cls, directory: str | Path, provider: KnowledgeProvider | None = None) -> "MtGenModel":
        directory = Path(directory)
        meta = cls._read_meta(directory)
        if meta["model_type"] != cls.model_type:
            raise ValueError(f"checkpoint is a {meta['model_type']} model, not {cls.model_type}")
        backbone = load_backbone(directory / "backbone")
        model = cls(
            backbone,
            knowledge=cls._knowledge_from_meta(meta),
            provider=provider,
            head_hidden=meta["head_hidden"],
        )
        model.head = ClassifierHead(backbone.encoder_dim, meta["head_hidden"])
        model.head.load_state_dict(torch.load(directory / "head.pt", weights_only=True))
        return model
