import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pncinterp.evaluation.matchers import LearnedMatcher, MatcherUnavailableError, NgramMatcher
from pncinterp.evaluation.metrics import (
    EvalPair,
    combined_mean,
    evaluate_pairs,
    ex_match_stats,
    load_predictions,
    pair_with_predictions,
    save_predictions,
    score_pair,
    sem_match_mean,
)
from pncinterp.evaluation.probe import dummy_relation_pairs, dummy_relation_probe
from pncinterp.dataset import DataError
from pncinterp.types import NON_COMPOSITIONAL, Paraphrase
from testutil import make_cmp_example, make_noncmp_example


class FixedMatcher:
    """Deterministic stub; scores by lookup with a default."""

    name = "fixed"
    version = "fixed-test"
    score_range = (0.0, 1.0)

    def __init__(self, table=None, default=0.7):
        self.table = table or {}
        self.default = default

    def match(self, gold, pred):
        return self.table.get((gold, pred), self.default)


P = Paraphrase


class TestScorePair:
    def test_piecewise_gate_all_four_combinations(self):
        matcher = FixedMatcher(default=0.7)
        assert score_pair(NON_COMPOSITIONAL, NON_COMPOSITIONAL, matcher) == 1.0
        assert score_pair(NON_COMPOSITIONAL, P("x y is z"), matcher) == 0.0
        assert score_pair(P("x y is z"), NON_COMPOSITIONAL, matcher) == 0.0
        assert score_pair(P("x y is z"), P("x y is w"), matcher) == 0.7

    def test_identity_paraphrase_hits_matcher_max(self):
        text = "London theatre is a theatre in London"
        assert score_pair(P(text), P(text), NgramMatcher()) == 1.0

    def test_symmetric_exact_branch(self):
        matcher = FixedMatcher()
        assert score_pair(NON_COMPOSITIONAL, NON_COMPOSITIONAL, matcher) == score_pair(
            NON_COMPOSITIONAL, NON_COMPOSITIONAL, matcher
        )


class TestExMatchStats:
    def test_all_agree(self):
        pairs = [(P("a b is c"), P("a b is c")), (NON_COMPOSITIONAL, NON_COMPOSITIONAL)]
        stats = ex_match_stats(pairs)
        assert stats.accuracy == 1.0

    def test_hand_confusion_matrix(self):
        pairs = [
            (P("a b is c"), P("a b is d")),       # TP
            (P("a b is c"), NON_COMPOSITIONAL),   # FN
            (NON_COMPOSITIONAL, P("a b is c")),   # FP
        ]
        stats = ex_match_stats(pairs)
        assert stats.precision == pytest.approx(1 / 2)
        assert stats.recall == pytest.approx(1 / 2)
        assert stats.accuracy == pytest.approx(1 / 3)

    def test_never_noncmp_predictions(self):
        # A generator that cannot emit the non-compositional label: CMP recall
        # is 1 and accuracy equals the CMP fraction.
        pairs = [
            (P("a b is c"), P("a b is c")),
            (P("d e is f"), P("d e is g")),
            (NON_COMPOSITIONAL, P("h i is j")),
        ]
        stats = ex_match_stats(pairs)
        assert stats.recall == 1.0
        assert stats.accuracy == pytest.approx(2 / 3)
        # Under the flipped framing the same predictions score zero.
        assert stats.precision_noncmp is None
        assert stats.recall_noncmp == 0.0

    def test_undefined_denominators_are_none(self):
        pairs = [(NON_COMPOSITIONAL, NON_COMPOSITIONAL)]
        stats = ex_match_stats(pairs)
        assert stats.precision is None
        assert stats.recall is None
        assert stats.accuracy == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ex_match_stats([])

    @settings(max_examples=100, deadline=None)
    @given(labels=st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=50))
    def test_matches_brute_force_confusion(self, labels):
        pairs = [
            (P("g h is x") if g else NON_COMPOSITIONAL, P("g h is y") if p else NON_COMPOSITIONAL)
            for g, p in labels
        ]
        stats = ex_match_stats(pairs)
        tp = sum(1 for g, p in labels if g and p)
        fp = sum(1 for g, p in labels if not g and p)
        fn = sum(1 for g, p in labels if g and not p)
        tn = sum(1 for g, p in labels if not g and not p)
        assert (stats.tp, stats.fp, stats.fn, stats.tn) == (tp, fp, fn, tn)


class TestSemMatchMean:
    def test_no_contributing_pairs_is_undefined(self):
        result = sem_match_mean([(NON_COMPOSITIONAL, P("a b is c"))], FixedMatcher())
        assert result.mean is None
        assert result.n_pairs == 0

    def test_identical_pair_is_matcher_max(self):
        text = "a b is c"
        result = sem_match_mean([(P(text), P(text))], NgramMatcher())
        assert result.mean == 1.0

    def test_arithmetic_mean(self):
        table = {("g1", "p1"): 0.2, ("g2", "p2"): 0.4, ("g3", "p3"): 0.6}
        pairs = [(P(g), P(p)) for (g, p) in table]
        assert sem_match_mean(pairs, FixedMatcher(table)).mean == pytest.approx(0.4)

    def test_mixed_pairs_excluded(self):
        pairs = [(P("g1"), P("p1")), (P("g2"), NON_COMPOSITIONAL)]
        result = sem_match_mean(pairs, FixedMatcher({("g1", "p1"): 0.5}))
        assert result.mean == 0.5
        assert result.n_pairs == 1


class TestCombinedMean:
    def test_all_correct_noncmp(self):
        pairs = [(NON_COMPOSITIONAL, NON_COMPOSITIONAL)] * 4
        assert combined_mean(pairs, FixedMatcher()) == 1.0

    def test_two_term_mean(self):
        pairs = [(NON_COMPOSITIONAL, NON_COMPOSITIONAL), (P("g"), P("p"))]
        assert combined_mean(pairs, FixedMatcher({("g", "p"): 0.5})) == pytest.approx(0.75)

    def test_collapses_to_sem_mean_when_all_cmp(self):
        table = {("g1", "p1"): 0.3, ("g2", "p2"): 0.9}
        pairs = [(P(g), P(p)) for (g, p) in table]
        matcher = FixedMatcher(table)
        assert combined_mean(pairs, matcher) == pytest.approx(sem_match_mean(pairs, matcher).mean)

    def test_bounded_by_extremes(self):
        rng = random.Random(0)
        table = {}
        pairs = []
        for i in range(20):
            g, p = f"g{i}", f"p{i}"
            table[(g, p)] = rng.random()
            pairs.append((P(g), P(p)))
        matcher = FixedMatcher(table)
        scores = [score_pair(g, p, matcher) for g, p in pairs]
        assert min(scores) <= combined_mean(pairs, matcher) <= max(scores)


class TestEvaluatePairs:
    def _pairs(self):
        return [
            (P("a b is c"), P("a b is c")),
            (NON_COMPOSITIONAL, NON_COMPOSITIONAL),
            (P("d e is f"), NON_COMPOSITIONAL),
        ]

    def test_report_fields(self):
        report = evaluate_pairs(self._pairs(), {"ngram": NgramMatcher()})
        assert report.n_total == 3
        assert report.n_both_cmp == 1
        assert report.sem_mean["ngram"] == 1.0
        assert report.combined_mean["ngram"] == pytest.approx(2 / 3)
        assert report.matcher_versions["ngram"] == "ngram-overlap-4"

    def test_order_independence(self):
        pairs = self._pairs()
        matchers = {"ngram": NgramMatcher()}
        shuffled = list(pairs)
        random.Random(3).shuffle(shuffled)
        assert evaluate_pairs(pairs, matchers).to_dict() == evaluate_pairs(shuffled, matchers).to_dict()

    def test_unavailable_matcher_marked_absent(self):
        def down(gold, pred):
            raise MatcherUnavailableError("down")

        matchers = {"ngram": NgramMatcher(), "learned": LearnedMatcher.from_callable(down)}
        report = evaluate_pairs(self._pairs(), matchers)
        assert report.absent_matchers == ["learned"]
        assert "ngram" in report.combined_mean
        assert "learned" not in report.combined_mean

    def test_constant_learned_matcher(self):
        matchers = {"learned": LearnedMatcher.from_callable(lambda g, p: 0.9)}
        report = evaluate_pairs([(P("g"), P("p"))], matchers)
        assert report.sem_mean["learned"] == 0.9

    def test_undefined_fields_listed(self):
        report = evaluate_pairs([(NON_COMPOSITIONAL, NON_COMPOSITIONAL)], {})
        assert "ex_precision" in report.undefined_fields()
        assert report.to_dict()["undefined"]


class TestPredictionFiles:
    def test_round_trip(self, tmp_path):
        predictions = {"a": P("x y is z"), "b": NON_COMPOSITIONAL}
        path = tmp_path / "preds.jsonl"
        save_predictions(predictions, path)
        assert load_predictions(path) == predictions

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_predictions(tmp_path / "none.jsonl")

    def test_alignment_by_id(self):
        examples = [
            make_cmp_example("Covid", "vaccine", "is a vaccine against Covid", "a"),
            make_noncmp_example("Watergate", "scandal", "b"),
        ]
        predictions = {"a": P("whatever text"), "b": NON_COMPOSITIONAL}
        pairs = pair_with_predictions(examples, predictions)
        assert [pair.id for pair in pairs] == ["a", "b"]
        assert pairs[0].compound == examples[0].compound

    def test_missing_prediction(self):
        examples = [make_noncmp_example("Watergate", "scandal", "b")]
        with pytest.raises(DataError, match="no prediction"):
            pair_with_predictions(examples, {})


class TestDummyRelationProbe:
    def _pairs(self):
        cmp_example = make_cmp_example("London", "theatre", "is a theatre in London", "a")
        noncmp_example = make_noncmp_example("Watergate", "scandal", "b")
        return [
            EvalPair(gold=cmp_example.gold, pred=cmp_example.gold, compound=cmp_example.compound, id="a"),
            EvalPair(gold=NON_COMPOSITIONAL, pred=NON_COMPOSITIONAL, compound=noncmp_example.compound, id="b"),
        ]

    def test_transform_targets_only_noncmp_gold(self):
        transformed = dummy_relation_pairs(self._pairs())
        assert transformed[0] == self._pairs()[0]
        assert transformed[1].pred == P("Watergate scandal is none of scandal")
        assert transformed[1].gold == P("Watergate scandal is non-compositional")

    def test_all_cmp_gold_is_identity(self):
        pairs = [p for p in self._pairs() if p.id == "a"]
        assert dummy_relation_pairs(pairs) == pairs

    def test_constant_matcher_sem_unchanged_for_cmp_pairs(self):
        matchers = {"fixed": FixedMatcher(default=0.7)}
        report = dummy_relation_probe(self._pairs(), matchers)
        assert report.sem_mean["fixed"] == pytest.approx(0.7)

    def test_ngram_sem_mean_drops_vs_faithful(self):
        pairs = self._pairs()
        matchers = {"ngram": NgramMatcher()}
        faithful = evaluate_pairs(pairs, matchers)
        probed = dummy_relation_probe(pairs, matchers)
        assert probed.sem_mean["ngram"] < faithful.sem_mean["ngram"]
        # But the dummy template still earns partial n-gram credit.
        assert probed.sem_mean["ngram"] > 0.0

    def test_compound_required(self):
        with pytest.raises(ValueError, match="compound"):
            dummy_relation_pairs([EvalPair(gold=NON_COMPOSITIONAL, pred=NON_COMPOSITIONAL)])
