import random

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pncinterp._kernels import _speedups_py
from pncinterp.evaluation.matchers import (
    LearnedMatcher,
    MatcherUnavailableError,
    NgramMatcher,
    ngram_overlap_score,
    tokenize,
)
from testutil import reference_ngram_score

try:
    from pncinterp._kernels import _speedups
except ImportError:
    _speedups = None

words = st.sampled_from("the a cat dog sat mat on in against vaccine covid outbreak of is".split())
sentences = st.lists(words, min_size=1, max_size=25).map(" ".join)


class TestTokenize:
    def test_lowercases_and_separates_punctuation(self):
        assert tokenize("The Covid-19 outbreak, worldwide.") == [
            "the", "covid", "-", "19", "outbreak", ",", "worldwide", ".",
        ]

    def test_empty(self):
        assert tokenize("   ") == []


class TestNgramMatcher:
    def test_identity_is_one(self):
        matcher = NgramMatcher()
        for text in ("a", "the cat sat", "Covid vaccine is a vaccine against Covid"):
            assert matcher.match(text, text) == 1.0

    def test_zero_overlap_is_zero(self):
        assert NgramMatcher().match("alpha beta gamma", "delta epsilon") == 0.0

    def test_empty_prediction_is_zero(self):
        assert NgramMatcher().match("the cat", "") == 0.0

    def test_against_reference_implementation(self):
        cases = [
            ("the cat sat on the mat", "the cat sat on a mat"),
            ("Covid vaccine is a vaccine against Covid", "Covid vaccine is a shot against Covid"),
            ("London theatre is a theatre in London", "London theatre is a theatre located in London"),
            ("a b c d e f", "a b c"),
            ("one two", "one two three four five"),
        ]
        matcher = NgramMatcher()
        for gold, pred in cases:
            assert matcher.match(gold, pred) == pytest.approx(reference_ngram_score(gold, pred), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(gold=sentences, pred=sentences)
    def test_reference_equivalence_property(self, gold, pred):
        assert NgramMatcher().match(gold, pred) == pytest.approx(reference_ngram_score(gold, pred), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(gold=sentences, pred=sentences)
    def test_range_property(self, gold, pred):
        score = NgramMatcher().match(gold, pred)
        assert 0.0 <= score <= 1.0


@pytest.mark.skipif(_speedups is None, reason="compiled kernels not built")
class TestKernelParity:
    @settings(max_examples=200, deadline=None)
    @given(
        gold=st.lists(st.integers(0, 30), min_size=0, max_size=40),
        pred=st.lists(st.integers(0, 30), min_size=0, max_size=40),
    )
    def test_ngram_counts_identical(self, gold, pred):
        compiled = _speedups.ngram_overlap_counts(gold, pred, 4)
        fallback = _speedups_py.ngram_overlap_counts(gold, pred, 4)
        assert list(compiled[0]) == list(fallback[0])
        assert list(compiled[1]) == list(fallback[1])

    @settings(max_examples=100, deadline=None)
    @given(
        xs=st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=60),
        data=st.data(),
    )
    def test_kendall_counts_identical(self, xs, data):
        ys = data.draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=len(xs), max_size=len(xs)))
        assert _speedups.kendall_pair_counts(xs, ys) == _speedups_py.kendall_pair_counts(xs, ys)


class TestOverlapScoreEdgeCases:
    def test_short_prediction_brevity_penalty(self):
        score = ngram_overlap_score(tokenize("a b c d"), tokenize("a"))
        assert 0.0 < score < 1.0

    def test_repetition_is_clipped(self):
        # "the the the" can only claim as many matches as gold contains.
        clipped_score = ngram_overlap_score(tokenize("the cat"), tokenize("the the the"))
        honest_score = ngram_overlap_score(tokenize("the cat"), tokenize("the cat"))
        assert clipped_score < honest_score


class TestLearnedMatcher:
    def test_constant_callable(self):
        matcher = LearnedMatcher.from_callable(lambda g, p: 0.9, version="const-0.9")
        assert matcher.match("a", "b") == 0.9
        assert matcher.version == "const-0.9"

    def test_fixture_file(self, tmp_path):
        path = tmp_path / "scores.json"
        path.write_text('{"gold text|||pred text": 0.42}', encoding="utf-8")
        matcher = LearnedMatcher.from_fixture(path)
        assert matcher.match("gold text", "pred text") == 0.42
        with pytest.raises(MatcherUnavailableError):
            matcher.match("other", "pair")

    def test_endpoint(self):
        def handler(request):
            import json

            body = json.loads(request.content)
            return httpx.Response(200, json={"score": 0.5 if body["reference"] == body["candidate"] else 0.1})

        matcher = LearnedMatcher.from_endpoint("https://scorer.test/score", transport=httpx.MockTransport(handler))
        assert matcher.match("same", "same") == 0.5
        assert matcher.match("same", "different") == 0.1

    def test_endpoint_down(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        matcher = LearnedMatcher.from_endpoint("https://scorer.test/score", transport=httpx.MockTransport(handler))
        with pytest.raises(MatcherUnavailableError):
            matcher.match("a", "b")


def test_large_vocabulary_pairs_still_agree():
    rng = random.Random(0)
    gold = [rng.randrange(500) for _ in range(300)]
    pred = [rng.randrange(500) for _ in range(300)]
    if _speedups is not None:
        compiled = _speedups.ngram_overlap_counts(gold, pred, 4)
        fallback = _speedups_py.ngram_overlap_counts(gold, pred, 4)
        assert list(compiled[0]) == list(fallback[0])
