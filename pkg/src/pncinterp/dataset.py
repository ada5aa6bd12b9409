"""Dataset ingestion and persistence.

The on-disk format is one JSON object per line:

    {"id": ..., "proper_noun": ..., "common_noun": ..., "sentence": ...,
     "span": [start, end], "interpretation": <relation text or null>}

``interpretation`` holds the annotated continuation of the compound (the
paraphrase minus its compound prefix, e.g. ``"is a biography about
Shakespeare"``); ``null`` or a blank string marks a non-compositional
compound.  In memory the paraphrase is the full sentence, compound included.

Split manifests are JSON maps ``{id: split-name}`` so published splits can be
loaded instead of regenerated.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .types import (
    NON_COMPOSITIONAL,
    SPLIT_NAMES,
    DatasetExample,
    NounCompound,
    Paraphrase,
)


class DataError(Exception):
    """A dataset, prediction, or manifest file is missing or malformed."""


_REQUIRED_FIELDS = ("id", "proper_noun", "common_noun", "sentence", "span")


def _example_from_record(record: dict) -> DatasetExample:
    missing = [f for f in _REQUIRED_FIELDS if f not in record]
    if missing:
        raise ValueError(f"missing field(s) {', '.join(missing)}")
    compound = NounCompound(
        proper_noun=record["proper_noun"],
        common_noun=record["common_noun"],
        sentence=record["sentence"],
        span=tuple(record["span"]),
    )
    relation = record.get("interpretation")
    if relation is None or not str(relation).strip():
        gold = NON_COMPOSITIONAL
    else:
        gold = Paraphrase(f"{compound.text} {relation}")
    return DatasetExample(compound=compound, gold=gold, id=str(record["id"]))


def load_dataset(path: str | Path) -> list[DatasetExample]:
    """Load a JSONL dataset file.

    Raises :class:`DataError` naming the line number of every malformed
    record (bad JSON, missing fields, span not matching the sentence, or a
    duplicate id).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    examples: list[DatasetExample] = []
    problems: list[str] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                example = _example_from_record(record)
            except (ValueError, TypeError) as exc:
                problems.append(f"line {lineno}: {exc}")
                continue
            if example.id in seen_ids:
                problems.append(f"line {lineno}: duplicate id {example.id!r}")
                continue
            seen_ids.add(example.id)
            examples.append(example)
    if problems:
        raise DataError(f"{path}: {len(problems)} malformed record(s): " + "; ".join(problems))
    return examples


def example_to_record(example: DatasetExample) -> dict:
    """The JSON-serializable record for one example (fixed key order)."""
    if isinstance(example.gold, Paraphrase):
        prefix = example.compound.text
        text = example.gold.text
        if text == prefix:
            relation = ""
        elif text.startswith(prefix + " "):
            relation = text[len(prefix) + 1 :]
        else:
            raise DataError(
                f"example {example.id}: paraphrase does not begin with the compound, cannot serialize"
            )
        if not relation.strip():
            raise DataError(f"example {example.id}: paraphrase reduces to a blank relation")
    else:
        relation = None
    return {
        "id": example.id,
        "proper_noun": example.compound.proper_noun,
        "common_noun": example.compound.common_noun,
        "sentence": example.compound.sentence,
        "span": list(example.compound.span),
        "interpretation": relation,
    }


def save_dataset(examples: Iterable[DatasetExample], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(json.dumps(example_to_record(example), ensure_ascii=False))
            handle.write("\n")


def save_manifest(manifest: dict[str, str], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    for example_id, split in manifest.items():
        if split not in SPLIT_NAMES:
            raise DataError(f"manifest entry {example_id!r} has unknown split {split!r}")
    path.write_text(json.dumps(manifest, ensure_ascii=False, indent=0) + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest file not found: {path}")
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(manifest, dict):
        raise DataError(f"{path}: manifest must be a JSON object of id -> split")
    for example_id, split in manifest.items():
        if split not in SPLIT_NAMES:
            raise DataError(f"{path}: id {example_id!r} mapped to unknown split {split!r}")
    return manifest


def apply_manifest(
    examples: list[DatasetExample], manifest: dict[str, str]
) -> tuple[list[DatasetExample], list[DatasetExample], list[DatasetExample]]:
    """Partition ``examples`` by a published {id: split} manifest.

    Every example id must appear in the manifest.
    """
    missing = [e.id for e in examples if e.id not in manifest]
    if missing:
        shown = ", ".join(missing[:5]) + ("..." if len(missing) > 5 else "")
        raise DataError(f"{len(missing)} example id(s) missing from manifest: {shown}")
    splits: dict[str, list[DatasetExample]] = {name: [] for name in SPLIT_NAMES}
    for example in examples:
        splits[manifest[example.id]].append(example)
    return splits["train"], splits["validation"], splits["test"]


def manifest_from_splits(
    train: Iterable[DatasetExample],
    validation: Iterable[DatasetExample],
    test: Iterable[DatasetExample],
) -> dict[str, str]:
    manifest: dict[str, str] = {}
    for name, split in zip(SPLIT_NAMES, (train, validation, test)):
        for example in split:
            manifest[example.id] = name
    return manifest
