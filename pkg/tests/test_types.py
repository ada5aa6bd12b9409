import pytest

from pncinterp.types import (
    NON_COMPOSITIONAL,
    DatasetExample,
    NounCompound,
    Paraphrase,
    SplitSpec,
    is_compositional,
)
from testutil import make_compound


class TestNounCompound:
    def test_span_must_match_compound(self):
        with pytest.raises(ValueError, match="expected"):
            NounCompound("Covid", "vaccine", "The Covid vaccine works", (0, 13))

    def test_valid_span(self):
        nc = NounCompound("Covid", "vaccine", "The Covid vaccine works", (4, 17))
        assert nc.text == "Covid vaccine"
        assert nc.sentence[nc.span[0] : nc.span[1]] == "Covid vaccine"

    def test_span_tolerates_extra_whitespace(self):
        nc = NounCompound("Covid", "vaccine", "The Covid  vaccine works", (4, 18))
        assert nc.text == "Covid vaccine"

    @pytest.mark.parametrize("proper,common", [("", "vaccine"), ("Covid", ""), ("Covid x", "vaccine"), ("Covid", "flu shot")])
    def test_tokens_validated(self, proper, common):
        with pytest.raises(ValueError):
            NounCompound(proper, common, "whatever text", (0, 5))

    def test_span_out_of_range(self):
        with pytest.raises(ValueError, match="span"):
            NounCompound("Covid", "vaccine", "Covid vaccine", (0, 99))


class TestInterpretation:
    def test_paraphrase_non_empty(self):
        with pytest.raises(ValueError):
            Paraphrase("   ")

    def test_tagging(self):
        assert is_compositional(Paraphrase("Covid vaccine is a vaccine against Covid"))
        assert not is_compositional(NON_COMPOSITIONAL)

    def test_value_equality(self):
        assert Paraphrase("x y is z") == Paraphrase("x y is z")
        assert NON_COMPOSITIONAL == NON_COMPOSITIONAL


class TestDatasetExample:
    def test_gold_paraphrase_must_start_with_compound(self):
        nc = make_compound("Covid", "vaccine")
        with pytest.raises(ValueError, match="begin with the compound"):
            DatasetExample(compound=nc, gold=Paraphrase("a vaccine against Covid"), id="e1")

    def test_noncmp_gold_unrestricted(self):
        example = DatasetExample(compound=make_compound("Watergate", "scandal"), gold=NON_COMPOSITIONAL, id="e1")
        assert example.id == "e1"

    def test_id_required(self):
        with pytest.raises(ValueError):
            DatasetExample(compound=make_compound("Covid", "vaccine"), gold=NON_COMPOSITIONAL, id="")


class TestSplitSpec:
    def test_requires_exactly_one_of_sizes_ratios(self):
        with pytest.raises(ValueError):
            SplitSpec(mode="random")
        with pytest.raises(ValueError):
            SplitSpec(mode="random", sizes=(1, 1, 1), ratios=(0.5, 0.25, 0.25))

    def test_ratios_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            SplitSpec(mode="random", ratios=(0.5, 0.2, 0.2))

    def test_resolve_sizes_exact(self):
        spec = SplitSpec(mode="random", sizes=(7, 2, 1))
        assert spec.resolve_sizes(10) == (7, 2, 1)
        with pytest.raises(ValueError, match="sum"):
            spec.resolve_sizes(11)

    def test_resolve_ratios_largest_remainder(self):
        spec = SplitSpec(mode="random", ratios=(0.5, 0.25, 0.25))
        assert sum(spec.resolve_sizes(101)) == 101
        assert spec.resolve_sizes(100) == (50, 25, 25)

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            SplitSpec(mode="stratified", sizes=(1, 0, 0))
