"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 external-service
error.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .dataset import (
    DataError,
    load_dataset,
    manifest_from_splits,
    save_dataset,
    save_manifest,
)
from .detect import FixtureParseProvider, mine_corpus
from .evaluation.correlation import load_judgements, metric_correlation
from .evaluation.matchers import LearnedMatcher, MatcherUnavailableError, NgramMatcher
from .evaluation.metrics import (
    evaluate_pairs,
    load_predictions,
    pair_with_predictions,
    save_predictions,
)
from .evaluation.probe import dummy_relation_probe
from .experiment import ExperimentConfig, run_experiment
from .fewshot import FixtureEmbedder, BackboneEmbedder, KnnSelector, RandomSelector, few_shot_predict, zero_shot_predict
from .knowledge import FixtureKnowledgeProvider, KnowledgeSource, ProviderError, WebKnowledgeProvider
from .models import MtGenModel, TrainConfig, UniGenModel, backbone_from_spec, load_model
from .models.ablation import shuffle_dataset
from .models.backbones import BackboneError
from .openie import (
    FixtureOpenIEClient,
    HttpOpenIEClient,
    IntegrationModel,
    OpenIEClientError,
    SubprocessOpenIEClient,
    augment_corpus,
    make_detector,
    make_integrator,
    sample_for_audit,
    save_extractions,
)
from .splits import InfeasibleSplitError, split_by_common_noun, split_random
from .stats import relation_stats
from .types import SplitSpec, is_compositional

logger = logging.getLogger(__name__)


def _parse_triplet(value: str, cast):
    parts = [cast(part) for part in value.split(",")]
    if len(parts) != 3:
        raise click.BadParameter(f"expected three comma-separated values, got {value!r}")
    return tuple(parts)


def _knowledge_provider(spec: str | None):
    if spec is None:
        return None
    if spec == "web":
        return WebKnowledgeProvider()
    path = spec.split(":", 1)[1] if spec.startswith("fixture:") else spec
    if not Path(path).exists():
        raise DataError(f"knowledge fixture not found: {path}")
    return FixtureKnowledgeProvider.from_file(path)


def _oie_client(spec: str):
    if spec.startswith("fixture:"):
        return FixtureOpenIEClient.from_file(spec.split(":", 1)[1])
    if spec.startswith("http:") or spec.startswith("https:"):
        return HttpOpenIEClient(spec)
    if spec.startswith("subprocess:"):
        return SubprocessOpenIEClient(spec.split(":", 1)[1].split())
    raise click.BadParameter(f"unknown Open IE client spec {spec!r}")


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
@click.option(
    "--config",
    "config_path",
    type=click.Path(),
    default=None,
    help="JSON file of per-command flag defaults, e.g. {\"train\": {\"backbone\": \"tiny\"}}.",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config_path: str | None) -> None:
    """Proper noun compound toolkit: detect, interpret, evaluate, augment."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    if config_path:
        if not Path(config_path).exists():
            raise DataError(f"config file not found: {config_path}")
        ctx.default_map = json.loads(Path(config_path).read_text(encoding="utf-8"))


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(), help="Sentence-per-line text file.")
@click.option("--parses", required=True, type=click.Path(), help="Fixture parse JSON file.")
@click.option("--out", "out_path", required=True, type=click.Path())
def detect(in_path: str, parses: str, out_path: str) -> None:
    """Detect proper noun compounds in parsed sentences."""
    if not Path(in_path).exists():
        raise DataError(f"sentence file not found: {in_path}")
    if not Path(parses).exists():
        raise DataError(f"parse fixture not found: {parses}")
    provider = FixtureParseProvider.from_file(parses)
    sentences = [line.rstrip("\n") for line in Path(in_path).read_text(encoding="utf-8").splitlines() if line.strip()]
    count = 0
    with Path(out_path).open("w", encoding="utf-8") as handle:
        for nc in mine_corpus(sentences, provider):
            record = {
                "proper_noun": nc.proper_noun,
                "common_noun": nc.common_noun,
                "sentence": nc.sentence,
                "span": list(nc.span),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    click.echo(f"detected {count} compounds from {len(sentences)} sentences -> {out_path}")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["common-noun-disjoint", "random"]), default="common-noun-disjoint")
@click.option("--sizes", default=None, help="Absolute split sizes, e.g. 17500,2500,2500.")
@click.option("--ratios", default=None, help="Split ratios, e.g. 0.7,0.1,0.2.")
@click.option("--seed", type=int, default=0)
@click.option("--out-manifest", required=True, type=click.Path())
@click.option("--out-dir", type=click.Path(), default=None, help="Also write train/validation/test files here.")
def split(in_path, mode, sizes, ratios, seed, out_manifest, out_dir) -> None:
    """Generate a train/validation/test split and save its manifest."""
    if (sizes is None) == (ratios is None):
        raise click.UsageError("give exactly one of --sizes or --ratios")
    examples = load_dataset(in_path)
    spec = SplitSpec(
        mode=mode,
        sizes=_parse_triplet(sizes, int) if sizes else None,
        ratios=_parse_triplet(ratios, float) if ratios else None,
        seed=seed,
    )
    splits = split_random(examples, spec) if mode == "random" else split_by_common_noun(examples, spec)
    save_manifest(manifest_from_splits(*splits), out_manifest)
    if out_dir:
        for name, part in zip(("train", "validation", "test"), splits):
            save_dataset(part, Path(out_dir) / f"{name}.jsonl")
    click.echo(f"split sizes: {len(splits[0])}/{len(splits[1])}/{len(splits[2])} -> {out_manifest}")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path())
@click.option("--top", type=int, default=5)
@click.option("--json", "json_path", type=click.Path(), default=None, help="Also write the full summary as JSON.")
def stats(in_path: str, top: int, json_path: str | None) -> None:
    """Relation statistics over the compositional examples."""
    examples = load_dataset(in_path)
    result = relation_stats(examples)
    n_noncmp = sum(1 for e in examples if not is_compositional(e.gold))
    click.echo(f"examples: {len(examples)} ({result.total_compositional} CMP, {n_noncmp} Non-CMP)")
    click.echo(f"unique relations: {result.n_unique}")
    click.echo(f"singleton relations: {result.n_singletons}")
    click.echo(f"mean examples per relation: {result.mean_frequency:.2f}")
    click.echo("frequency buckets: " + ", ".join(f"{k}: {v}" for k, v in result.frequency_buckets().items()))
    click.echo(f"top {top} relations:")
    for relation, count in result.top(top):
        click.echo(f"  {relation} ({count})")
    if json_path:
        Path(json_path).write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")


@cli.command()
@click.option("--model", "model_name", type=click.Choice(["unigen", "mtgen"]), required=True)
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--val", "val_path", required=True, type=click.Path())
@click.option("--backbone", default="tiny", help="echo | tiny | pretrained:<name>")
@click.option("--knowledge", default="none", help="Source or '+'-stacked sources.")
@click.option("--provider", default=None, help="fixture:<json path> or web.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--batch-size", type=int, default=16)
@click.option("--lr", type=float, default=2e-5)
@click.option("--epochs", type=int, default=10)
@click.option("--seed", type=int, default=0)
def train(model_name, train_path, val_path, backbone, knowledge, provider, out_dir, batch_size, lr, epochs, seed):
    """Train a supervised interpreter and save its checkpoint."""
    train_examples = load_dataset(train_path)
    val_examples = load_dataset(val_path)
    sources = [KnowledgeSource(part) for part in knowledge.split("+")]
    model_cls = UniGenModel if model_name == "unigen" else MtGenModel
    model = model_cls(
        backbone_from_spec(backbone, seed=seed),
        knowledge=sources,
        provider=_knowledge_provider(provider),
    )
    config = TrainConfig(batch_size=batch_size, learning_rate=lr, max_epochs=epochs, seeds=(seed,))
    log = model.train(train_examples, val_examples, config, seed=seed, log_path=Path(out_dir) / "train_log.jsonl")
    model.save(out_dir)
    best = max(entry["val_sem_ex"] for entry in log.entries)
    click.echo(f"trained {model_name} for {epochs} epochs; best val Sem/Ex {best:.3f} -> {out_dir}")


@cli.command()
@click.option("--model-dir", required=True, type=click.Path())
@click.option("--in", "in_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--provider", default=None)
@click.option("--shuffle-target", type=click.Choice(["proper", "common"]), default=None)
@click.option("--shuffle-seed", type=int, default=0)
def predict(model_dir, in_path, out_path, provider, shuffle_target, shuffle_seed):
    """Predict interpretations for a dataset file."""
    model = load_model(model_dir, provider=_knowledge_provider(provider))
    examples = load_dataset(in_path)
    if shuffle_target:
        examples = shuffle_dataset(examples, shuffle_target, shuffle_seed)
    predictions = {example.id: model.predict(example) for example in examples}
    save_predictions(predictions, out_path)
    click.echo(f"wrote {len(predictions)} predictions -> {out_path}")


@cli.command()
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--test", "test_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["few", "zero"]), default="few")
@click.option("--k", type=int, default=10)
@click.option("--selector", type=click.Choice(["knn", "random"]), default="knn")
@click.option("--backbone", default="tiny")
@click.option("--embedder", default=None, help="Fixture embedding JSON; defaults to the backbone encoder.")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
def fewshot(train_path, test_path, mode, k, selector, backbone, embedder, seed, out_path):
    """Zero- or few-shot prompting over a test file."""
    from .serialize import serialize_target

    train_examples = load_dataset(train_path)
    test_examples = load_dataset(test_path)
    bb = backbone_from_spec(backbone, seed=seed)
    corpus = [f"{e.compound.text} => {serialize_target(e.compound, e.gold)}" for e in train_examples]
    bb.prepare(corpus + [e.compound.text for e in test_examples])
    if mode == "zero":
        predictions = {e.id: zero_shot_predict(e.compound, bb) for e in test_examples}
    else:
        if selector == "random":
            chosen = RandomSelector(k=k, seed=seed)
        else:
            emb = FixtureEmbedder.from_file(embedder) if embedder else BackboneEmbedder(bb)
            chosen = KnnSelector(k=k, embedder=emb)
        predictions = {e.id: few_shot_predict(e.compound, train_examples, chosen, bb) for e in test_examples}
    save_predictions(predictions, out_path)
    click.echo(f"wrote {len(predictions)} predictions -> {out_path}")


@cli.command()
@click.option("--gold", "gold_path", required=True, type=click.Path())
@click.option("--pred", "pred_path", required=True, type=click.Path())
@click.option("--learned-endpoint", default=None)
@click.option("--learned-fixture", default=None, type=click.Path())
@click.option("--probe", type=click.Choice(["dummy-relation"]), default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
def evaluate(gold_path, pred_path, learned_endpoint, learned_fixture, probe, report_path):
    """Score predictions against gold with the hybrid metric."""
    examples = load_dataset(gold_path)
    predictions = load_predictions(pred_path)
    pairs = pair_with_predictions(examples, predictions)
    matchers = {"ngram": NgramMatcher()}
    if learned_endpoint:
        matchers["learned"] = LearnedMatcher.from_endpoint(learned_endpoint)
    elif learned_fixture:
        matchers["learned"] = LearnedMatcher.from_fixture(learned_fixture)
    if probe == "dummy-relation":
        report = dummy_relation_probe(pairs, matchers)
    else:
        report = evaluate_pairs(pairs, matchers)
    payload = report.to_dict()
    for line in (
        f"n = {report.n_total} (both compositional: {report.n_both_cmp})",
        f"Ex-Match  P/R/Acc: {_fmt(report.ex_precision)} / {_fmt(report.ex_recall)} / {_fmt(report.ex_accuracy)}",
        *(f"Sem-Match[{name}]: {_fmt(value)}" for name, value in report.sem_mean.items()),
        *(f"Sem/Ex-Match[{name}]: {_fmt(value)}" for name, value in report.combined_mean.items()),
    ):
        click.echo(line)
    if report.absent_matchers:
        click.echo(f"absent matchers: {', '.join(report.absent_matchers)}")
    if report_path:
        Path(report_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def _fmt(value: float | None) -> str:
    return "undefined" if value is None else f"{100 * value:.1f}"


@cli.command()
@click.option("--judgements", required=True, type=click.Path(), help="JSONL of {id, rating: bad|average|good}.")
@click.option("--scores", "scores_path", default=None, type=click.Path(), help="JSONL of {id, score}.")
@click.option("--gold", "gold_path", default=None, type=click.Path())
@click.option("--pred", "pred_path", default=None, type=click.Path())
def correlate(judgements, scores_path, gold_path, pred_path):
    """Correlate matcher scores with human judgements (Pearson, Kendall tau-b)."""
    ratings = load_judgements(judgements)
    if scores_path:
        scores = {}
        for line in Path(scores_path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                scores[str(record["id"])] = float(record["score"])
    elif gold_path and pred_path:
        examples = {e.id: e for e in load_dataset(gold_path)}
        predictions = load_predictions(pred_path)
        matcher = NgramMatcher()
        scores = {}
        for example_id in ratings:
            if example_id not in examples or example_id not in predictions:
                raise DataError(f"judged id {example_id!r} missing from gold or predictions")
            gold, pred = examples[example_id].gold, predictions[example_id]
            if is_compositional(gold) and is_compositional(pred):
                scores[example_id] = matcher.match(gold.text, pred.text)
    else:
        raise click.UsageError("give --scores, or both --gold and --pred")
    ids = [i for i in ratings if i in scores]
    if len(ids) < 3:
        raise DataError(f"only {len(ids)} scored judgements; need at least 3")
    result = metric_correlation([scores[i] for i in ids], [float(ratings[i]) for i in ids])
    click.echo(f"n = {result.n}")
    click.echo(f"pearson = {result.pearson if result.pearson is not None else 'undefined'}")
    click.echo(f"kendall tau-b = {result.kendall if result.kendall is not None else 'undefined'}")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(), help="Sentence-per-line corpus.")
@click.option("--parses", required=True, type=click.Path())
@click.option("--oie", required=True, help="fixture:<path> | http(s):<url> | subprocess:<command>")
@click.option("--interpreter", "interpreter_dir", required=True, type=click.Path())
@click.option("--integration", "integration_dir", required=True, type=click.Path())
@click.option("--provider", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--audit", "audit_path", type=click.Path(), default=None)
@click.option("--audit-size", type=int, default=500)
def augment(in_path, parses, oie, interpreter_dir, integration_dir, provider, out_path, report_path, audit_path, audit_size):
    """Augment Open IE extractions with implicit compound relations."""
    sentences = [line.rstrip("\n") for line in Path(in_path).read_text(encoding="utf-8").splitlines() if line.strip()]
    parse_provider = FixtureParseProvider.from_file(parses)
    client = _oie_client(oie)
    interpreter_model = load_model(interpreter_dir, provider=_knowledge_provider(provider))
    integration_model = IntegrationModel.load(integration_dir)
    extractions, report = augment_corpus(
        sentences,
        client,
        detector=make_detector(parse_provider),
        interpreter=lambda nc: interpreter_model.predict(nc),
        integrator=make_integrator(integration_model),
    )
    save_extractions(extractions, out_path)
    click.echo(
        f"{report.n_original} original + {report.n_augmented} augmented extractions "
        f"(yield +{report.yield_increase_pct:.1f}%) -> {out_path}"
    )
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    if audit_path:
        save_extractions(sample_for_audit(extractions, k=audit_size), audit_path)
        click.echo(f"audit sample -> {audit_path}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--model", default=None)
@click.option("--data", default=None)
@click.option("--out", "out_dir", default=None)
@click.option("--backbone", default=None)
@click.option("--seeds", default=None, help="Comma-separated seed list.")
@click.option("--knowledge", default=None, help="Comma-separated knowledge settings.")
@click.option("--limit", type=int, default=None)
def experiment(config_path, model, data, out_dir, backbone, seeds, knowledge, limit):
    """Run a multi-seed experiment from a config file (flags override)."""
    overrides = {
        "model": model,
        "data": data,
        "out_dir": out_dir,
        "backbone": backbone,
        "seeds": [int(s) for s in seeds.split(",")] if seeds else None,
        "knowledge": knowledge.split(",") if knowledge else None,
        "limit": limit,
    }
    config = ExperimentConfig.from_file(config_path, overrides)
    results = run_experiment(config)
    click.echo((Path(config.out_dir) / "table.txt").read_text(encoding="utf-8"))
    click.echo(f"run artifacts in {config.out_dir}")
    return results


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (DataError, InfeasibleSplitError, ValueError, json.JSONDecodeError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (ProviderError, OpenIEClientError, MatcherUnavailableError, BackboneError) as exc:
        click.echo(f"external service error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
