from pncinterp.stats import relation_of, relation_stats
from testutil import make_cmp_example, make_noncmp_example


class TestRelationOf:
    def test_strips_compound_and_trailing_proper_noun(self):
        example = make_cmp_example("Leake", "government", "is located in Leake", "a")
        assert relation_of(example) == "is located in"

    def test_keeps_tail_when_not_proper_noun(self):
        example = make_cmp_example("Covid", "vaccine", "is a vaccine against the disease", "a")
        assert relation_of(example) == "is a vaccine against the disease"

    def test_noncmp_is_none(self):
        assert relation_of(make_noncmp_example("Watergate", "scandal", "a")) is None


class TestRelationStats:
    def test_empty_input(self):
        stats = relation_stats([])
        assert stats.n_unique == 0
        assert stats.frequencies == []
        assert stats.frequency_buckets()["1"] == 0

    def test_single_relation_counted_by_hand(self):
        examples = [
            make_cmp_example("Covid", "vaccine", "is located in Covid", "a"),
            make_cmp_example("Leake", "government", "is located in Leake", "b"),
            make_cmp_example("Oxford", "theatre", "is located in Oxford", "c"),
        ]
        stats = relation_stats(examples)
        # Manual tally: one relation, three occurrences.
        assert stats.frequencies == [("is located in", 3)]
        assert stats.total_compositional == 3
        assert stats.frequency_buckets()["3"] == 1

    def test_noncmp_skipped_and_total_matches(self):
        examples = [
            make_cmp_example("Covid", "vaccine", "is located in Covid", "a"),
            make_noncmp_example("Watergate", "scandal", "b"),
        ]
        stats = relation_stats(examples)
        assert stats.total_compositional == 1

    def test_sorted_descending_with_alphabetical_ties(self):
        examples = [
            make_cmp_example("A", "vaccine", "is made by A", "a"),
            make_cmp_example("B", "vaccine", "is made by B", "b"),
            make_cmp_example("C", "theatre", "is owned by C", "c"),
        ]
        stats = relation_stats(examples)
        assert stats.top(2) == [("is made by", 2), ("is owned by", 1)]

    def test_buckets_and_singletons(self):
        examples = []
        for i in range(11):
            examples.append(make_cmp_example(f"P{i}", "port", "is the port of", f"x{i}"))
        examples.append(make_cmp_example("Q", "choir", "is sung by Q", "y"))
        stats = relation_stats(examples)
        assert stats.n_singletons == 1
        buckets = stats.frequency_buckets()
        assert buckets["10+"] == 1
        assert buckets["1"] == 1
        assert stats.mean_frequency == 12 / 2
