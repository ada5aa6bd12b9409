"""Acceptance suite: one test per release criterion, each printed as a
pass/fail line in the terminal summary (see conftest).

The dataset-statistics and full-scale round-trip criteria run against the
released annotation data when ``PRONCI_DATA`` (a dataset JSONL in the
documented format) and optionally ``PRONCI_MANIFEST`` (the published split
labels) are set; otherwise the documented substitute checks run on the
synthetic fixture corpus.
"""

import os
import random
import time
from collections import Counter

import pytest

from pncinterp.dataset import load_dataset, load_manifest, apply_manifest, save_dataset
from pncinterp.detect import detect_pncs
from pncinterp.evaluation.correlation import kendall_tau_b, pearson
from pncinterp.evaluation.matchers import NgramMatcher
from pncinterp.evaluation.metrics import (
    combined_mean,
    evaluate_pairs,
    ex_match_stats,
    score_pair,
    sem_match_mean,
)
from pncinterp.evaluation.probe import dummy_relation_probe
from pncinterp.evaluation.metrics import EvalPair
from pncinterp.experiment import ExperimentConfig, run_experiment
from pncinterp.fewshot import FixtureEmbedder, KnnSelector, select_demos, zero_shot_template
from pncinterp.knowledge import FixtureKnowledgeProvider, KnowledgeSource, build_prompt
from pncinterp.models import EchoBackbone, MtGenModel, TinySeq2SeqBackbone, TrainConfig, UniGenModel
from pncinterp.openie import Extraction, postprocess
from pncinterp.serialize import parse_output, serialize_target
from pncinterp.splits import split_by_common_noun
from pncinterp.stats import relation_stats
from pncinterp.synthetic import make_synthetic_dataset
from pncinterp.types import NON_COMPOSITIONAL, NounCompound, Paraphrase, SplitSpec, is_compositional
from testutil import brute_force_detect, brute_force_knn, brute_force_tau_b, detection_suite, make_cmp_example

PRONCI_DATA = os.environ.get("PRONCI_DATA")
PRONCI_MANIFEST = os.environ.get("PRONCI_MANIFEST")


def _random_interpretation(rng: random.Random):
    if rng.random() < 0.4:
        return NON_COMPOSITIONAL
    words = "covid vaccine outbreak theatre london oxford against located in of the a is".split()
    return Paraphrase(" ".join(rng.choices(words, k=rng.randint(2, 10))))


def test_metric_oracle_equivalence_on_1000_random_pairs():
    rng = random.Random(2024)
    pairs = [(_random_interpretation(rng), _random_interpretation(rng)) for _ in range(1000)]
    matcher = NgramMatcher()

    started = time.monotonic()
    stats = ex_match_stats(pairs)
    sem = sem_match_mean(pairs, matcher)
    combined = combined_mean(pairs, matcher)
    scores = [score_pair(g, p, matcher) for g, p in pairs]
    elapsed = time.monotonic() - started

    # Independent brute-force scorer: explicit confusion matrix + piecewise
    # mean, using the matcher as a black box.
    tp = fp = fn = tn = 0
    piecewise, sem_scores = [], []
    for gold, pred in pairs:
        gold_cmp, pred_cmp = isinstance(gold, Paraphrase), isinstance(pred, Paraphrase)
        if gold_cmp and pred_cmp:
            tp += 1
            value = matcher.match(gold.text, pred.text)
            piecewise.append(value)
            sem_scores.append(value)
        elif gold_cmp:
            fn += 1
            piecewise.append(0.0)
        elif pred_cmp:
            fp += 1
            piecewise.append(0.0)
        else:
            tn += 1
            piecewise.append(1.0)

    assert (stats.tp, stats.fp, stats.fn, stats.tn) == (tp, fp, fn, tn)
    assert abs(stats.precision - tp / (tp + fp)) <= 1e-12
    assert abs(stats.recall - tp / (tp + fn)) <= 1e-12
    assert abs(stats.accuracy - (tp + tn) / 1000) <= 1e-12
    assert abs(sem.mean - sum(sem_scores) / len(sem_scores)) <= 1e-12
    assert sem.n_pairs == len(sem_scores)
    assert abs(combined - sum(piecewise) / 1000) <= 1e-12
    for mine, reference in zip(scores, piecewise):
        assert abs(mine - reference) <= 1e-12
    assert elapsed < 5.0, f"metric evaluation took {elapsed:.2f}s"


def test_piecewise_gate_all_label_combinations():
    class HalfMatcher:
        name = "half"
        version = "half"
        score_range = (0.0, 1.0)

        def match(self, gold, pred):
            return 0.5

    matcher = HalfMatcher()
    paraphrase = Paraphrase("x y is a thing of x")
    assert score_pair(NON_COMPOSITIONAL, NON_COMPOSITIONAL, matcher) == 1.0
    assert score_pair(NON_COMPOSITIONAL, paraphrase, matcher) == 0.0
    assert score_pair(paraphrase, NON_COMPOSITIONAL, matcher) == 0.0
    assert score_pair(paraphrase, paraphrase, matcher) == 0.5


def test_detection_rule_matches_brute_force_scan():
    suite = detection_suite()
    assert len(suite) >= 30
    started = time.monotonic()
    discrepancies = 0
    for parsed, expected_pairs in suite:
        detected = [(nc.proper_noun, nc.common_noun, nc.span) for nc in detect_pncs(parsed)]
        if detected != brute_force_detect(parsed):
            discrepancies += 1
        assert [(p, c) for p, c, _ in detected] == expected_pairs
    elapsed = time.monotonic() - started
    assert discrepancies == 0
    assert elapsed < 1.0, f"detection suite took {elapsed:.2f}s"


BUDDHIST_SENTENCE = (
    "Recent visitors to the campus include Buddhist monks who installed an "
    "environmental artwork at Lower Pond."
)
MONKS_GLOSS = (
    "a male religious living in a cloister and devoting himself to "
    "contemplation and prayer and work"
)
BUDDHIST_SUMMARY = (
    "Buddhism is a widespread Asian religion based on a series of original "
    "teachings attributed to Gautama Buddha."
)


def test_prompt_formats_bit_exact():
    start = BUDDHIST_SENTENCE.index("Buddhist monks")
    nc = NounCompound("Buddhist", "monks", BUDDHIST_SENTENCE, (start, start + len("Buddhist monks")))
    provider = FixtureKnowledgeProvider(
        gloss={"monks": MONKS_GLOSS},
        wiki={"Buddhist": BUDDHIST_SUMMARY},
        ner={"Buddhist": "NORP"},
    )
    produced = {
        source: build_prompt(nc, source, provider).text
        for source in KnowledgeSource
    }
    assert produced[KnowledgeSource.NONE] == "Buddhist monks"
    assert produced[KnowledgeSource.SENTENCE] == f"{BUDDHIST_SENTENCE} [SEP] Buddhist monks"
    assert produced[KnowledgeSource.WIKI_NNP] == f"Buddhist meaning: {BUDDHIST_SUMMARY} [SEP] Buddhist monks"
    assert produced[KnowledgeSource.WORDNET_NN] == f"monks meaning: {MONKS_GLOSS} [SEP] Buddhist monks"
    assert produced[KnowledgeSource.NER_NNP] == (
        "Buddhist belongs to nationalities or religious groups [SEP] Buddhist monks"
    )

    compounds = [
        ("Covid", "vaccine"), ("Oxford", "vaccine"), ("Shakespeare", "biography"),
        ("London", "theatre"), ("Watergate", "scandal"), ("Kawasaki", "disease"),
        ("Buddhist", "monks"), ("Rohingya", "refugee"), ("Tesla", "factory"), ("X", "y"),
    ]
    for proper, common in compounds:
        compound_text = f"{proper} {common}"
        nc = NounCompound(proper, common, compound_text, (0, len(compound_text)))
        assert zero_shot_template(nc) == f"{proper} {common} is a <extra_id_0> the {proper}"


def test_postprocess_rule_reference_triple_and_token_conservation():
    sentence = "Workers sound alarm on COVID-19 outbreak"
    pnc = NounCompound("COVID-19", "outbreak", sentence, (22, 40))
    original = Extraction("Workers", "sound alarm on", "COVID-19 outbreak", sentence)
    integrated = Extraction("Workers", "sound alarm on", "outbreak of COVID-19", sentence)
    result = postprocess(original, integrated, pnc)
    assert result.triple() == ("Workers", "sound alarm on outbreak of", "COVID-19")

    rng = random.Random(99)
    vocabulary = "alpha beta gamma delta epsilon zeta eta theta".split()
    for _ in range(100):
        relation = " ".join(rng.choices(vocabulary, k=rng.randint(1, 3)))
        moved = rng.choices(vocabulary, k=rng.randint(1, 4))
        tail = rng.choices(vocabulary, k=rng.randint(0, 3))
        original = Extraction("Subject", relation, f"{pnc.proper_noun} {pnc.common_noun}")
        integrated = Extraction("Subject", relation, " ".join(moved + [pnc.proper_noun] + tail))
        rewritten = postprocess(original, integrated, pnc)
        assert rewritten is not None
        produced = Counter((rewritten.relation + " " + rewritten.object).split())
        conserved = Counter((integrated.relation + " " + integrated.object).split())
        assert produced == conserved
        assert rewritten.object.split()[0] == pnc.proper_noun


@pytest.mark.skipif(not PRONCI_DATA, reason="PRONCI_DATA not set; substitute split check runs instead")
def test_dataset_statistics_released_data():
    examples = load_dataset(PRONCI_DATA)
    assert len(examples) == 22500
    n_cmp = sum(1 for e in examples if is_compositional(e.gold))
    assert (n_cmp, len(examples) - n_cmp) == (14389, 8111)

    stats = relation_stats(examples)
    assert stats.n_unique == 7383
    assert stats.n_singletons == 6061
    assert [count for _, count in stats.top(5)] == [560, 389, 245, 215, 125]

    if PRONCI_MANIFEST:
        train, validation, test = apply_manifest(examples, load_manifest(PRONCI_MANIFEST))
        def cmp_noncmp(split):
            cmp_count = sum(1 for e in split if is_compositional(e.gold))
            return cmp_count, len(split) - cmp_count
        assert cmp_noncmp(train) == (9722, 5568)
        assert cmp_noncmp(validation) == (1416, 934)
        assert cmp_noncmp(test) == (2497, 1609)


def test_dataset_statistics_substitute_disjoint_split():
    # Substitute criterion for when the released data is absent: generated
    # disjoint splits have zero common-noun overlap and sizes within 2% of
    # their targets.
    rng = random.Random(0)
    examples, i = [], 0
    for group in range(160):
        size = 1 if rng.random() < 0.6 else rng.randint(2, 8)
        for _ in range(size):
            examples.append(
                make_cmp_example(f"P{i}", f"noun{group}", f"is the noun{group} of P{i}", f"id-{i}")
            )
            i += 1
    spec = SplitSpec(mode="common-noun-disjoint", ratios=(0.7, 0.15, 0.15), seed=7)
    splits = split_by_common_noun(examples, spec)
    homes = {}
    for index, part in enumerate(splits):
        for example in part:
            noun = example.compound.common_noun
            assert homes.setdefault(noun, index) == index, f"{noun} crosses splits"
    for part, target in zip(splits, spec.resolve_sizes(len(examples))):
        assert abs(len(part) - target) <= 0.02 * target + 1e-9


def test_knn_selection_exact_on_200_embeddings():
    rng = random.Random(5)
    train = []
    vectors = {}
    for i in range(200):
        example = make_cmp_example(f"Proper{i}", f"noun{i}", f"is the noun{i} of Proper{i}", f"t{i:03d}")
        train.append(example)
        if i % 17 == 0:
            vectors[example.compound.text] = [1.0, 2.0, 3.0, 4.0]  # deliberate exact ties
        else:
            vectors[example.compound.text] = [rng.gauss(0, 1) for _ in range(4)]
    query = make_cmp_example("Covid", "vaccine", "is a vaccine against Covid", "q").compound
    query_vec = [rng.gauss(0, 1) for _ in range(4)]
    vectors[query.text] = query_vec

    started = time.monotonic()
    for k in (5, 10):
        selector = KnnSelector(k=k, embedder=FixtureEmbedder(vectors))
        chosen = [e.id for e in select_demos(query, train, selector)]
        expected = brute_force_knn(query_vec, [(e.id, vectors[e.compound.text]) for e in train], k)
        assert chosen == expected
    elapsed = time.monotonic() - started
    assert elapsed < 1.0, f"KNN selection took {elapsed:.2f}s"


def test_kendall_pearson_definitions():
    rng = random.Random(17)
    for n in (10, 100, 500):
        x = [float(rng.randrange(3)) for _ in range(n)]  # tie-heavy, like ratings
        y = [round(rng.random(), 2) for _ in range(n)]
        assert kendall_tau_b(x, y) == brute_force_tau_b(x, y)

    monotone = [float(i) for i in range(50)]
    assert kendall_tau_b(monotone, [2 * v + 1 for v in monotone]) == 1.0
    assert kendall_tau_b(monotone, list(reversed(monotone))) == -1.0
    assert pearson(monotone, [2 * v + 1 for v in monotone]) == pytest.approx(1.0, abs=1e-12)


OVERFIT_CONFIG = TrainConfig(batch_size=8, learning_rate=5e-3, max_epochs=10, seeds=(0,))


def _train_accuracy(model, train):
    stats = ex_match_stats([(e.gold, model.predict(e)) for e in train])
    return stats.accuracy


def test_overfit_sanity_tiny_backbone_and_echo_oracle():
    data = make_synthetic_dataset(110, seed=1)
    train, val = data[:100], data[100:]

    started = time.monotonic()
    unigen = UniGenModel(TinySeq2SeqBackbone(seed=0))
    unigen.train(train, val, OVERFIT_CONFIG, seed=0)
    assert _train_accuracy(unigen, train) >= 0.95

    mtgen = MtGenModel(TinySeq2SeqBackbone(seed=0))
    mtgen.train(train, val, OVERFIT_CONFIG, seed=0)
    assert _train_accuracy(mtgen, train) >= 0.95
    elapsed = time.monotonic() - started
    assert elapsed < 600.0, f"overfit training took {elapsed:.1f}s"

    matchers = {"ngram": NgramMatcher()}
    for model_cls in (UniGenModel, MtGenModel):
        model = model_cls(EchoBackbone())
        model.train(train, train, TrainConfig(batch_size=8, learning_rate=1e-3, max_epochs=2, seeds=(0,)))
        report = evaluate_pairs([(e.gold, model.predict(e)) for e in train], matchers)
        assert report.ex_precision == 1.0
        assert report.ex_recall == 1.0
        assert report.ex_accuracy == 1.0
        assert report.sem_mean["ngram"] == 1.0
        assert report.combined_mean["ngram"] == 1.0


def test_round_trips():
    if PRONCI_DATA:
        examples = load_dataset(PRONCI_DATA)
    else:
        examples = make_synthetic_dataset(300, seed=12)
    for example in examples:
        rendered = serialize_target(example.compound, example.gold)
        assert parse_output(example.compound, rendered) == example.gold

    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "round.jsonl"
        save_dataset(examples, path)
        assert load_dataset(path) == examples


def test_reduced_scale_experiments_end_to_end(tmp_path, capsys):
    """The full-scale experiments run end-to-end at desk scale and emit the
    paper-shaped tables; the expected trend (supervised > KNN few-shot >
    zero-shot) is reported but not gated."""
    data_path = tmp_path / "data.jsonl"
    save_dataset(make_synthetic_dataset(90, seed=21), data_path)
    split = {"mode": "common-noun-disjoint", "ratios": [0.7, 0.15, 0.15], "seed": 0}
    train = {"batch_size": 8, "learning_rate": 5e-3, "max_epochs": 6, "seeds": [0]}

    def run(model, out, **kwargs):
        config = ExperimentConfig(
            model=model, data=str(data_path), out_dir=str(tmp_path / out),
            backbone="tiny", seeds=[0], train=train, split=split, **kwargs,
        )
        results = run_experiment(config)
        table = (tmp_path / out / "table.txt").read_text()
        for column in ("Ex-P", "Ex-R", "Ex-Acc", "Sem[ngram]", "Sem/Ex[ngram]"):
            assert column in table
        return results[0].reports[0]

    supervised = run("unigen", "supervised")
    knn = run("fewshot", "knn", selector="knn", k=5)
    zero = run("zeroshot", "zero")

    scores = {
        "supervised": supervised.combined_mean["ngram"],
        "knn-fewshot": knn.combined_mean["ngram"],
        "zero-shot": zero.combined_mean["ngram"],
    }
    ordered = scores["supervised"] >= scores["knn-fewshot"] >= scores["zero-shot"]
    print(f"\n[trend report, not gated] Sem/Ex-Match: {scores} -> expected ordering held: {ordered}")

    # Shuffle ablation runs end-to-end and emits the same table shape.
    ablated = ExperimentConfig(
        model="unigen", data=str(data_path), out_dir=str(tmp_path / "ablation"),
        backbone="echo", seeds=[0], train={"batch_size": 8, "learning_rate": 1e-3, "max_epochs": 1, "seeds": [0]},
        split=split, shuffle_target="common",
    )
    run_experiment(ablated)
    assert (tmp_path / "ablation" / "table.txt").exists()

    # The template-scoring probe runs over real predictions.
    examples = load_dataset(data_path)
    model = UniGenModel(EchoBackbone())
    model.train(examples, examples, TrainConfig(batch_size=8, learning_rate=1e-3, max_epochs=1, seeds=(0,)))
    pairs = [
        EvalPair(gold=e.gold, pred=model.predict(e), compound=e.compound, id=e.id) for e in examples
    ]
    matchers = {"ngram": NgramMatcher()}
    probed = dummy_relation_probe(pairs, matchers)
    faithful = evaluate_pairs(pairs, matchers)
    assert probed.sem_mean["ngram"] < faithful.sem_mean["ngram"]

    # Metric-quality correlation runs on desk-scale fixtures.
    rng = random.Random(3)
    ratings = [float(rng.randrange(3)) for _ in range(40)]
    noisy_scores = [r / 2 + rng.gauss(0, 0.2) for r in ratings]
    assert kendall_tau_b(noisy_scores, ratings) is not None
