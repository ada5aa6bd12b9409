"""Experiment orchestration: multi-seed runs, aggregated result tables, and
paired significance tests.

A run directory receives the config snapshot, per-seed predictions, reports
and training logs, an aggregated ``report.json``, and a rendered
``table.txt`` whose columns follow the Ex-Match P/R/Acc, Sem-Match,
Sem/Ex-Match layout (values scaled to percentages).
"""

from __future__ import annotations

import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from scipy import stats as scipy_stats

from .dataset import apply_manifest, load_dataset, load_manifest
from .evaluation.matchers import LearnedMatcher, NgramMatcher, SemanticMatcher
from .evaluation.metrics import EvalReport, evaluate_pairs, save_predictions
from .fewshot import BackboneEmbedder, FixtureEmbedder, KnnSelector, RandomSelector, few_shot_predict, zero_shot_predict
from .knowledge import FixtureKnowledgeProvider, KnowledgeSource
from .models import MtGenModel, TrainConfig, UniGenModel, backbone_from_spec
from .models.ablation import shuffle_dataset
from .serialize import serialize_target
from .splits import split_by_common_noun, split_random
from .types import DatasetExample, SplitSpec

logger = logging.getLogger(__name__)

SUPERVISED_MODELS = ("unigen", "mtgen")
MODEL_CHOICES = SUPERVISED_MODELS + ("zeroshot", "fewshot")

_COLUMN_GAP = "  "


@dataclass
class ExperimentConfig:
    """Everything a run needs; loadable from JSON with flag overrides."""

    model: str
    data: str
    out_dir: str
    knowledge: list[str] = field(default_factory=lambda: ["none"])
    backbone: str = "tiny"
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    train: dict = field(default_factory=dict)
    matchers: list[str] = field(default_factory=lambda: ["ngram"])
    selector: str = "knn"
    k: int = 5
    split: dict = field(default_factory=lambda: {"mode": "common-noun-disjoint", "ratios": [0.7, 0.1, 0.2], "seed": 0})
    provider: str | None = None
    embedder: str | None = None
    shuffle_target: str | None = None
    limit: int | None = None
    compare: list[str] | None = None

    def __post_init__(self) -> None:
        if self.model not in MODEL_CHOICES:
            raise ValueError(f"model must be one of {MODEL_CHOICES}, got {self.model!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.shuffle_target not in (None, "proper", "common"):
            raise ValueError(f"shuffle_target must be 'proper' or 'common', got {self.shuffle_target!r}")

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "data": self.data,
            "out_dir": self.out_dir,
            "knowledge": list(self.knowledge),
            "backbone": self.backbone,
            "seeds": list(self.seeds),
            "train": dict(self.train),
            "matchers": list(self.matchers),
            "selector": self.selector,
            "k": self.k,
            "split": dict(self.split),
            "provider": self.provider,
            "embedder": self.embedder,
            "shuffle_target": self.shuffle_target,
            "limit": self.limit,
            "compare": list(self.compare) if self.compare else None,
        }


def _resolve_splits(config: ExperimentConfig, examples: list[DatasetExample]):
    split = config.split
    if "manifest" in split:
        return apply_manifest(examples, load_manifest(split["manifest"]))
    spec = SplitSpec(
        mode=split.get("mode", "common-noun-disjoint"),
        sizes=tuple(split["sizes"]) if "sizes" in split else None,
        ratios=tuple(split["ratios"]) if "ratios" in split else None,
        seed=split.get("seed", 0),
    )
    if spec.mode == "random":
        return split_random(examples, spec)
    return split_by_common_noun(examples, spec)


def _build_matchers(specs: Sequence[str]) -> dict[str, SemanticMatcher]:
    matchers: dict[str, SemanticMatcher] = {}
    for spec in specs:
        if spec == "ngram":
            matchers["ngram"] = NgramMatcher()
        elif spec.startswith("learned:"):
            matchers["learned"] = LearnedMatcher.from_endpoint(spec.split(":", 1)[1])
        elif spec.startswith("learned-fixture:"):
            matchers["learned"] = LearnedMatcher.from_fixture(spec.split(":", 1)[1])
        else:
            raise ValueError(f"unknown matcher spec {spec!r}")
    return matchers


def _knowledge_sources(setting: str) -> list[KnowledgeSource]:
    return [KnowledgeSource(part) for part in setting.split("+")]


def _run_supervised_seed(
    config: ExperimentConfig,
    setting: str,
    seed: int,
    train: list[DatasetExample],
    validation: list[DatasetExample],
    test: list[DatasetExample],
    matchers: dict[str, SemanticMatcher],
    seed_dir: Path,
) -> EvalReport:
    provider = FixtureKnowledgeProvider.from_file(config.provider) if config.provider else None
    backbone = backbone_from_spec(config.backbone, seed=seed)
    sources = _knowledge_sources(setting)
    model_cls = UniGenModel if config.model == "unigen" else MtGenModel
    model = model_cls(backbone, knowledge=sources, provider=provider)
    train_config = TrainConfig(**config.train) if config.train else TrainConfig()
    model.train(train, validation, train_config, seed=seed, log_path=seed_dir / "train_log.jsonl")
    model.save(seed_dir / "checkpoint")
    predictions = {example.id: model.predict(example) for example in test}
    save_predictions(predictions, seed_dir / "predictions.jsonl")
    return evaluate_pairs([(e.gold, predictions[e.id]) for e in test], matchers)


def _run_prompting_seed(
    config: ExperimentConfig,
    seed: int,
    train: list[DatasetExample],
    test: list[DatasetExample],
    matchers: dict[str, SemanticMatcher],
    seed_dir: Path,
) -> EvalReport:
    backbone = backbone_from_spec(config.backbone, seed=seed)
    corpus = [f"{e.compound.text} => {serialize_target(e.compound, e.gold)}" for e in train]
    corpus += [e.compound.text for e in test]
    backbone.prepare(corpus)
    if config.model == "zeroshot":
        predict = lambda nc: zero_shot_predict(nc, backbone)
    else:
        if config.selector == "random":
            selector = RandomSelector(k=config.k, seed=seed)
        else:
            embedder = (
                FixtureEmbedder.from_file(config.embedder)
                if config.embedder
                else BackboneEmbedder(backbone)
            )
            selector = KnnSelector(k=config.k, embedder=embedder)
        predict = lambda nc: few_shot_predict(nc, train, selector, backbone)
    predictions = {example.id: predict(example.compound) for example in test}
    save_predictions(predictions, seed_dir / "predictions.jsonl")
    return evaluate_pairs([(e.gold, predictions[e.id]) for e in test], matchers)


@dataclass
class SettingResult:
    setting: str
    reports: list[EvalReport]

    _METRICS = ("ex_precision", "ex_recall", "ex_accuracy")

    def aggregate(self) -> dict[str, tuple[float, float] | None]:
        """Mean and standard deviation per metric across seeds."""
        columns: dict[str, list[float]] = {}
        for report in self.reports:
            for name in self._METRICS:
                value = getattr(report, name)
                if value is not None:
                    columns.setdefault(name, []).append(value)
            for matcher, value in report.sem_mean.items():
                if value is not None:
                    columns.setdefault(f"sem_{matcher}", []).append(value)
            for matcher, value in report.combined_mean.items():
                columns.setdefault(f"sem_ex_{matcher}", []).append(value)
        out: dict[str, tuple[float, float] | None] = {}
        for name, values in columns.items():
            out[name] = (statistics.mean(values), statistics.pstdev(values) if len(values) > 1 else 0.0)
        return out

    def seed_scores(self, metric: str) -> list[float]:
        scores = []
        for report in self.reports:
            if metric.startswith("sem_ex_"):
                scores.append(report.combined_mean[metric[len("sem_ex_") :]])
            elif metric.startswith("sem_"):
                scores.append(report.sem_mean[metric[len("sem_") :]])
            else:
                scores.append(getattr(report, metric))
        return scores


@dataclass(frozen=True)
class TTestResult:
    setting_a: str
    setting_b: str
    metric: str
    statistic: float
    p_value: float
    n: int


def paired_ttest(scores_a: Sequence[float], scores_b: Sequence[float]) -> tuple[float, float]:
    """Student's paired t-test; returns (statistic, two-sided p-value)."""
    if len(scores_a) != len(scores_b):
        raise ValueError("paired t-test needs equal-length score vectors")
    if len(scores_a) < 2:
        raise ValueError("paired t-test needs at least two pairs")
    result = scipy_stats.ttest_rel(scores_a, scores_b)
    return float(result.statistic), float(result.pvalue)


def _format_cell(value: tuple[float, float] | None) -> str:
    if value is None:
        return "undef"
    mean, std = value
    return f"{100 * mean:.1f} ± {100 * std:.2f}"


def render_table(results: list[SettingResult], matcher_names: Sequence[str]) -> str:
    """Text table with the Ex-Match / Sem-Match / Sem-Ex-Match column layout."""
    columns = ["ex_precision", "ex_recall", "ex_accuracy"]
    headers = ["Setting", "Ex-P", "Ex-R", "Ex-Acc"]
    for matcher in matcher_names:
        columns.append(f"sem_{matcher}")
        headers.append(f"Sem[{matcher}]")
    for matcher in matcher_names:
        columns.append(f"sem_ex_{matcher}")
        headers.append(f"Sem/Ex[{matcher}]")
    rows = [headers]
    for result in results:
        aggregated = result.aggregate()
        rows.append([result.setting] + [_format_cell(aggregated.get(column)) for column in columns])
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = []
    for index, row in enumerate(rows):
        lines.append(_COLUMN_GAP.join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if index == 0:
            lines.append("-" * (sum(widths) + len(_COLUMN_GAP) * (len(widths) - 1)))
    return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig) -> list[SettingResult]:
    """Train/evaluate each (setting, seed) cell and persist the aggregate.

    A failing seed aborts the run but whatever finished is already on disk in
    the run directory.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2), encoding="utf-8")

    examples = load_dataset(config.data)
    if config.limit:
        examples = examples[: config.limit]
    train, validation, test = _resolve_splits(config, examples)
    if config.shuffle_target:
        test = shuffle_dataset(test, config.shuffle_target, seed=0)
    matchers = _build_matchers(config.matchers)

    settings = config.knowledge if config.model in SUPERVISED_MODELS else ["none"]
    results: list[SettingResult] = []
    try:
        for setting in settings:
            label = f"{config.model}/{setting}"
            if config.model == "fewshot":
                label = f"{config.model}-{config.selector}-{config.k}"
            reports = []
            for seed in config.seeds:
                logger.info("running %s seed %d", label, seed)
                seed_dir = out_dir / setting.replace("+", "_") / f"seed-{seed}"
                seed_dir.mkdir(parents=True, exist_ok=True)
                if config.model in SUPERVISED_MODELS:
                    report = _run_supervised_seed(
                        config, setting, seed, train, validation, test, matchers, seed_dir
                    )
                else:
                    report = _run_prompting_seed(config, seed, train, test, matchers, seed_dir)
                (seed_dir / "report.json").write_text(
                    json.dumps(report.to_dict(), indent=2), encoding="utf-8"
                )
                reports.append(report)
            results.append(SettingResult(setting=label, reports=reports))
    finally:
        _persist(out_dir, config, results, matchers)
    return results


def _persist(
    out_dir: Path,
    config: ExperimentConfig,
    results: list[SettingResult],
    matchers: dict[str, SemanticMatcher],
) -> None:
    from . import __version__

    payload = {
        "settings": {
            result.setting: {
                name: (None if value is None else {"mean": value[0], "std": value[1]})
                for name, value in result.aggregate().items()
            }
            for result in results
        },
        "matchers": {name: matcher.version for name, matcher in matchers.items()},
        "n_seeds": len(config.seeds),
        "package_version": __version__,
        "backbone": config.backbone,
    }
    if config.compare and len(results) >= 2:
        by_name = {r.setting: r for r in results}
        name_a, name_b = config.compare
        if name_a in by_name and name_b in by_name:
            metric = f"sem_ex_{next(iter(matchers))}"
            statistic, p_value = paired_ttest(
                by_name[name_a].seed_scores(metric), by_name[name_b].seed_scores(metric)
            )
            payload["paired_ttest"] = {
                "a": name_a,
                "b": name_b,
                "metric": metric,
                "statistic": statistic,
                "p_value": p_value,
            }
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2), encoding="utf-8")
    (out_dir / "table.txt").write_text(render_table(results, list(matchers)), encoding="utf-8")
