"""Supervised interpreters, their backbones, and the shuffle ablation."""

from pathlib import Path

from .ablation import apply_char_permutation, shuffle_ablation, shuffle_dataset
from .backbones import (
    BackboneError,
    EchoBackbone,
    PretrainedSeq2SeqBackbone,
    Seq2SeqBackbone,
    TinySeq2SeqBackbone,
    TorchBackbone,
    backbone_from_spec,
    load_backbone,
)
from .mtgen import ClassifierHead, MtGenModel, max_pool_states
from .training import InterpreterModel, KnowledgeMismatchError, TrainConfig, TrainingLog
from .unigen import UniGenModel


def load_model(directory, provider=None):
    """Load whichever interpreter model was saved in ``directory``."""
    import json

    meta = json.loads((Path(directory) / "meta.json").read_text(encoding="utf-8"))
    model_type = meta["model_type"]
    if model_type == "unigen":
        return UniGenModel.load(directory, provider=provider)
    if model_type == "mtgen":
        return MtGenModel.load(directory, provider=provider)
    if model_type == "integration":
        from ..openie import IntegrationModel

        return IntegrationModel.load(directory)
    raise ValueError(f"unknown model type {model_type!r} in {directory}")


__all__ = [
    "BackboneError",
    "ClassifierHead",
    "EchoBackbone",
    "InterpreterModel",
    "KnowledgeMismatchError",
    "MtGenModel",
    "PretrainedSeq2SeqBackbone",
    "Seq2SeqBackbone",
    "TinySeq2SeqBackbone",
    "TorchBackbone",
    "TrainConfig",
    "TrainingLog",
    "UniGenModel",
    "apply_char_permutation",
    "backbone_from_spec",
    "load_backbone",
    "load_model",
    "max_pool_states",
    "shuffle_ablation",
    "shuffle_dataset",
]
