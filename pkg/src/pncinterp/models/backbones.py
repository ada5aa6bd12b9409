"""Sequence-to-sequence backbones behind the interpretation models.

Three implementations ship:

* :class:`EchoBackbone` — an oracle that memorizes its training pairs and
  plays them back; used to test that the surrounding harness adds no error.
* :class:`TinySeq2SeqBackbone` — a small word-level GRU encoder-decoder with
  dot attention, trainable on a CPU in seconds; used for desk-scale runs.
* :class:`PretrainedSeq2SeqBackbone` — an adapter around a Hugging Face
  text-to-text transformer for full-scale experiments.

Generation is greedy everywhere, so a fixed checkpoint is deterministic.
"""

from __future__ import annotations

import copy
import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch
from torch import nn

from ..serialize import parse_output
from ..types import NounCompound, is_compositional

logger = logging.getLogger(__name__)

PAD, BOS, EOS, UNK = 0, 1, 2, 3
_SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")


class BackboneError(Exception):
    """A backbone failed to run or load."""


class Seq2SeqBackbone(ABC):
    """Abstract text-to-text backbone.

    ``infill_token`` is the single-slot mask token used by the zero-shot
    template; ``context_budget`` the input size limit in whitespace tokens
    (None when unbounded).
    """

    kind: str = "abstract"
    infill_token: str = "<extra_id_0>"
    context_budget: int | None = None
    encoder_dim: int = 0

    def prepare(self, corpus: Iterable[str]) -> None:
        """Hook called with all training text before the first train_step."""

    def begin_training(self, learning_rate: float) -> None:
        """Hook called once per training run with the configured rate."""

    @abstractmethod
    def encode(self, text: str) -> np.ndarray:
        """Encoder hidden states for one input, shape [seq_len, encoder_dim]."""

    @abstractmethod
    def generate(self, text: str) -> str:
        """Greedy decode for one input."""

    @abstractmethod
    def train_step(self, batch: Sequence[tuple[str, str]]) -> float:
        """One optimization step on (input, target) pairs; returns the loss."""

    def infill(self, text: str) -> str:
        """Text for the single mask slot; defaults to plain generation."""
        return self.generate(text)

    @abstractmethod
    def snapshot(self) -> object: ...

    @abstractmethod
    def restore(self, state: object) -> None: ...

    @abstractmethod
    def save(self, directory: str | Path) -> None: ...


class TorchBackbone(Seq2SeqBackbone):
    """Backbones with differentiable internals, joint-trainable with heads."""

    @property
    @abstractmethod
    def torch_module(self) -> nn.Module: ...

    @abstractmethod
    def encode_batch(self, texts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        """Differentiable encoder states and mask: ([B, T, D], [B, T])."""

    @abstractmethod
    def generation_loss(self, inputs: Sequence[str], targets: Sequence[str]) -> torch.Tensor: ...


class EchoBackbone(Seq2SeqBackbone):
    """Oracle backbone: memorizes training pairs, echoes them at inference.

    ``encode`` exposes what was memorized as a near-one-hot vector (seen
    compositional / seen non-compositional / unseen), so a classifier head on
    top can reach perfect training accuracy and harness tests can expect
    exactly 100 on every metric.
    """

    kind = "echo"
    encoder_dim = 4

    def __init__(self) -> None:
        self.memory: dict[str, str] = {}

    def _label_vector(self, text: str) -> list[float]:
        target = self.memory.get(text)
        if target is None:
            return [0.0, 0.0, 1.0, 1.0]
        placeholder = NounCompound("X", "y", "X y", (0, 3))
        if is_compositional(parse_output(placeholder, target)):
            return [1.0, 0.0, 0.0, 1.0]
        return [0.0, 1.0, 0.0, 1.0]

    def encode(self, text: str) -> np.ndarray:
        return np.array([self._label_vector(text)], dtype=np.float32)

    def generate(self, text: str) -> str:
        return self.memory.get(text, "")

    def train_step(self, batch: Sequence[tuple[str, str]]) -> float:
        self.memory.update(batch)
        return 0.0

    def snapshot(self) -> object:
        return dict(self.memory)

    def restore(self, state: object) -> None:
        self.memory = dict(state)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "backbone.json").write_text(
            json.dumps({"kind": self.kind}), encoding="utf-8"
        )
        (directory / "memory.json").write_text(
            json.dumps(self.memory, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: str | Path) -> "EchoBackbone":
        backbone = cls()
        backbone.memory = json.loads((Path(directory) / "memory.json").read_text(encoding="utf-8"))
        return backbone


class _TinyNet(nn.Module):
    """GRU encoder-decoder with dot attention over encoder states."""

    def __init__(self, vocab_size: int, embed_dim: int, hidden_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.encoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.decoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(2 * hidden_dim, vocab_size)

    def encode(self, ids: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        states, final = self.encoder(self.embedding(ids))
        return states, final

    def decode(
        self,
        dec_ids: torch.Tensor,
        hidden: torch.Tensor,
        enc_states: torch.Tensor,
        enc_mask: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        dec_states, hidden = self.decoder(self.embedding(dec_ids), hidden)
        scores = torch.bmm(dec_states, enc_states.transpose(1, 2))
        scores = scores.masked_fill(~enc_mask.unsqueeze(1), float("-inf"))
        context = torch.bmm(torch.softmax(scores, dim=-1), enc_states)
        logits = self.out(torch.cat([dec_states, context], dim=-1))
        return logits, hidden


class TinySeq2SeqBackbone(TorchBackbone):
    """Word-level GRU seq2seq small enough for CPU overfit tests."""

    kind = "tiny"

    def __init__(
        self,
        embed_dim: int = 64,
        hidden_dim: int = 128,
        max_len: int = 48,
        max_vocab: int = 8000,
        seed: int = 0,
    ):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.max_len = max_len
        self.max_vocab = max_vocab
        self.seed = seed
        self.encoder_dim = hidden_dim
        self.vocab: dict[str, int] = {}
        self._net: _TinyNet | None = None
        self._optimizer: torch.optim.Optimizer | None = None
        self._learning_rate = 1e-3

    def prepare(self, corpus: Iterable[str]) -> None:
        if self._net is not None:
            return
        counts: dict[str, int] = {}
        for text in corpus:
            for token in text.split():
                counts[token] = counts.get(token, 0) + 1
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        self.vocab = {token: i for i, token in enumerate(_SPECIALS)}
        for token, _ in ranked[: self.max_vocab]:
            self.vocab.setdefault(token, len(self.vocab))
        torch.manual_seed(self.seed)
        self._net = _TinyNet(len(self.vocab), self.embed_dim, self.hidden_dim)

    def _require_net(self) -> _TinyNet:
        if self._net is None:
            raise BackboneError("backbone not prepared: call prepare() with the training corpus first")
        return self._net

    def _ids(self, text: str, add_eos: bool = False) -> list[int]:
        ids = [self.vocab.get(token, UNK) for token in text.split()[: self.max_len]]
        if add_eos:
            ids.append(EOS)
        return ids or [UNK]

    def _pad_batch(self, seqs: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
        width = max(len(s) for s in seqs)
        ids = torch.full((len(seqs), width), PAD, dtype=torch.long)
        for row, seq in enumerate(seqs):
            ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        return ids, ids != PAD

    @property
    def torch_module(self) -> nn.Module:
        return self._require_net()

    def encode_batch(self, texts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        net = self._require_net()
        ids, mask = self._pad_batch([self._ids(t) for t in texts])
        states, _ = net.encode(ids)
        return states, mask

    def encode(self, text: str) -> np.ndarray:
        with torch.no_grad():
            states, _ = self.encode_batch([text])
        return states[0].numpy()

    def generation_loss(self, inputs: Sequence[str], targets: Sequence[str]) -> torch.Tensor:
        net = self._require_net()
        enc_ids, enc_mask = self._pad_batch([self._ids(t) for t in inputs])
        enc_states, enc_final = net.encode(enc_ids)
        target_ids = [self._ids(t, add_eos=True) for t in targets]
        dec_in, _ = self._pad_batch([[BOS] + seq[:-1] for seq in target_ids])
        dec_out, _ = self._pad_batch(target_ids)
        logits, _ = net.decode(dec_in, enc_final, enc_states, enc_mask)
        return nn.functional.cross_entropy(
            logits.reshape(-1, logits.size(-1)), dec_out.reshape(-1), ignore_index=PAD
        )

    def begin_training(self, learning_rate: float) -> None:
        self._learning_rate = learning_rate
        self._optimizer = None

    def _require_optimizer(self) -> torch.optim.Optimizer:
        if self._optimizer is None:
            self._optimizer = torch.optim.Adam(self._require_net().parameters(), lr=self._learning_rate)
        return self._optimizer

    def train_step(self, batch: Sequence[tuple[str, str]]) -> float:
        optimizer = self._require_optimizer()
        optimizer.zero_grad()
        loss = self.generation_loss([x for x, _ in batch], [y for _, y in batch])
        loss.backward()
        optimizer.step()
        return float(loss.detach())

    def generate(self, text: str) -> str:
        net = self._require_net()
        id_to_token = {i: t for t, i in self.vocab.items()}
        with torch.no_grad():
            enc_ids, enc_mask = self._pad_batch([self._ids(text)])
            enc_states, hidden = net.encode(enc_ids)
            token = torch.tensor([[BOS]], dtype=torch.long)
            out_tokens: list[str] = []
            for _ in range(self.max_len):
                logits, hidden = net.decode(token, hidden, enc_states, enc_mask)
                next_id = int(logits[0, -1].argmax())
                if next_id == EOS:
                    break
                if next_id not in (PAD, BOS):
                    out_tokens.append(id_to_token.get(next_id, _SPECIALS[UNK]))
                token = torch.tensor([[next_id]], dtype=torch.long)
        return " ".join(out_tokens)

    def snapshot(self) -> object:
        return copy.deepcopy(self._require_net().state_dict())

    def restore(self, state: object) -> None:
        self._require_net().load_state_dict(state)

    def save(self, directory: str | Path) -> None:
        net = self._require_net()
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "kind": self.kind,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "max_len": self.max_len,
            "max_vocab": self.max_vocab,
            "seed": self.seed,
        }
        (directory / "backbone.json").write_text(json.dumps(meta), encoding="utf-8")
        (directory / "vocab.json").write_text(json.dumps(self.vocab, ensure_ascii=False), encoding="utf-8")
        torch.save(net.state_dict(), directory / "weights.pt")

    @classmethod
    def load(cls, directory: str | Path) -> "TinySeq2SeqBackbone":
        directory = Path(directory)
        meta = json.loads((directory / "backbone.json").read_text(encoding="utf-8"))
        backbone = cls(
            embed_dim=meta["embed_dim"],
            hidden_dim=meta["hidden_dim"],
            max_len=meta["max_len"],
            max_vocab=meta["max_vocab"],
            seed=meta["seed"],
        )
        backbone.vocab = json.loads((directory / "vocab.json").read_text(encoding="utf-8"))
        backbone._net = _TinyNet(len(backbone.vocab), backbone.embed_dim, backbone.hidden_dim)
        backbone._net.load_state_dict(torch.load(directory / "weights.pt", weights_only=True))
        return backbone


class PretrainedSeq2SeqBackbone(TorchBackbone):
    """Adapter around a pretrained Hugging Face text-to-text model.

    Pass a model name to download, or inject ``model`` and ``tokenizer``
    directly (used by offline tests).  The tokenizer only needs ``__call__``
    returning input_ids/attention_mask and ``batch_decode``.
    """

    kind = "pretrained"
    context_budget = 512

    def __init__(
        self,
        model_name: str = "t5-base",
        model=None,
        tokenizer=None,
        max_target_len: int = 64,
    ):
        self.model_name = model_name
        self.max_target_len = max_target_len
        if model is None or tokenizer is None:
            try:
                from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
            except ImportError as exc:
                raise BackboneError(
                    "the pretrained backbone needs the 'transformers' package "
                    "(pip install pncinterp[pretrained])"
                ) from exc
            tokenizer = tokenizer or AutoTokenizer.from_pretrained(model_name)
            model = model or AutoModelForSeq2SeqLM.from_pretrained(model_name)
        self.model = model
        self.tokenizer = tokenizer
        self.encoder_dim = int(model.config.d_model)
        self._optimizer: torch.optim.Optimizer | None = None
        self._learning_rate = 2e-5

    def _batch(self, texts: Sequence[str]):
        return self.tokenizer(list(texts), return_tensors="pt", padding=True, truncation=True)

    @property
    def torch_module(self) -> nn.Module:
        return self.model

    def encode_batch(self, texts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        batch = self._batch(texts)
        states = self.model.get_encoder()(
            input_ids=batch["input_ids"], attention_mask=batch["attention_mask"]
        ).last_hidden_state
        return states, batch["attention_mask"].bool()

    def encode(self, text: str) -> np.ndarray:
        with torch.no_grad():
            states, _ = self.encode_batch([text])
        return states[0].numpy()

    def generation_loss(self, inputs: Sequence[str], targets: Sequence[str]) -> torch.Tensor:
        batch = self._batch(inputs)
        labels = self._batch(targets)["input_ids"]
        labels = labels.masked_fill(labels == self.tokenizer.pad_token_id, -100)
        return self.model(
            input_ids=batch["input_ids"], attention_mask=batch["attention_mask"], labels=labels
        ).loss

    def begin_training(self, learning_rate: float) -> None:
        self._learning_rate = learning_rate
        self._optimizer = None

    def train_step(self, batch: Sequence[tuple[str, str]]) -> float:
        if self._optimizer is None:
            self._optimizer = torch.optim.AdamW(self.model.parameters(), lr=self._learning_rate)
        self._optimizer.zero_grad()
        loss = self.generation_loss([x for x, _ in batch], [y for _, y in batch])
        loss.backward()
        self._optimizer.step()
        return float(loss.detach())

    def generate(self, text: str) -> str:
        batch = self._batch([text])
        with torch.no_grad():
            output = self.model.generate(
                input_ids=batch["input_ids"],
                attention_mask=batch["attention_mask"],
                max_new_tokens=self.max_target_len,
                num_beams=1,
                do_sample=False,
            )
        return self.tokenizer.batch_decode(output, skip_special_tokens=True)[0].strip()

    def infill(self, text: str) -> str:
        """Fill the template slot: text between <extra_id_0> and <extra_id_1>."""
        batch = self._batch([text])
        with torch.no_grad():
            output = self.model.generate(
                input_ids=batch["input_ids"],
                attention_mask=batch["attention_mask"],
                max_new_tokens=self.max_target_len,
                num_beams=1,
                do_sample=False,
            )
        decoded = self.tokenizer.batch_decode(output, skip_special_tokens=False)[0]
        span = decoded.split("<extra_id_0>")[-1].split("<extra_id_1>")[0]
        for special in ("</s>", "<pad>"):
            span = span.replace(special, " ")
        return " ".join(span.split())

    def snapshot(self) -> object:
        return copy.deepcopy(self.model.state_dict())

    def restore(self, state: object) -> None:
        self.model.load_state_dict(state)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "backbone.json").write_text(
            json.dumps({"kind": self.kind, "model_name": self.model_name}), encoding="utf-8"
        )
        self.model.save_pretrained(directory / "model")
        self.tokenizer.save_pretrained(directory / "model")

    @classmethod
    def load(cls, directory: str | Path) -> "PretrainedSeq2SeqBackbone":
        directory = Path(directory)
        meta = json.loads((directory / "backbone.json").read_text(encoding="utf-8"))
        try:
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        except ImportError as exc:
            raise BackboneError("loading a pretrained backbone needs 'transformers'") from exc
        model = AutoModelForSeq2SeqLM.from_pretrained(directory / "model")
        tokenizer = AutoTokenizer.from_pretrained(directory / "model")
        return cls(model_name=meta["model_name"], model=model, tokenizer=tokenizer)


_BACKBONE_KINDS = {
    "echo": EchoBackbone,
    "tiny": TinySeq2SeqBackbone,
    "pretrained": PretrainedSeq2SeqBackbone,
}


def load_backbone(directory: str | Path):
    """Load whatever backbone was saved in ``directory``."""
    marker = Path(directory) / "backbone.json"
    if not marker.exists():
        raise BackboneError(f"no backbone found in {directory}")
    kind = json.loads(marker.read_text(encoding="utf-8"))["kind"]
    if kind not in _BACKBONE_KINDS:
        raise BackboneError(f"unknown backbone kind {kind!r}")
    return _BACKBONE_KINDS[kind].load(directory)


def backbone_from_spec(spec: str, seed: int = 0) -> Seq2SeqBackbone:
    """Build a backbone from a CLI spec: "echo", "tiny", "pretrained:<name>"."""
    if spec == "echo":
        return EchoBackbone()
    if spec == "tiny":
        return TinySeq2SeqBackbone(seed=seed)
    if spec.startswith("pretrained:"):
        return PretrainedSeq2SeqBackbone(model_name=spec.split(":", 1)[1])
    if spec == "pretrained":
        return PretrainedSeq2SeqBackbone()
    raise BackboneError(f"unknown backbone spec {spec!r}")
