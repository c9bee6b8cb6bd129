import pytest
from hypothesis import given, strategies as st

from potfin.errors import InputError
from potfin.index import (Finite, NatIndex, Predicate, ProductFilter, ProductIndex, ThresholdGraph, TrivialIndex,
                          UpsetFilter, check_filter_laws, default_filter, empty, image_on, is_cofinal,
                          sample_subsets, up)

NP = NatIndex(1)
N0 = NatIndex(0)
PAIR = ProductIndex((NP, NP))


def test_nat_order_and_join():
    assert NP.leq(2, 5) and not NP.leq(5, 2)
    assert NP.join(3, 7) == 7
    assert NP.upto(4) == [1, 2, 3, 4]
    assert N0.upto(2) == [0, 1, 2]
    assert NP.kind == "natplus" and N0.kind == "nat"


def test_nat_validation_rejects_out_of_range():
    for bad in (0, -1, True, "3", 2.0):
        with pytest.raises(InputError):
            NP.validate(bad)
    with pytest.raises(InputError):
        NatIndex(0, top=4).validate(5)


def test_horizon_is_capped_by_top():
    assert NP.horizon(4) == 10
    assert NatIndex(0, top=6).horizon(4) == 6


def test_trivial_index_has_one_point():
    T = TrivialIndex()
    assert T.upto("*") == ["*"]
    assert T.join("*", "*") == "*"
    assert T.leq("*", "*")


def test_product_is_componentwise():
    assert PAIR.leq((1, 2), (2, 2)) and not PAIR.leq((1, 3), (2, 2))
    assert PAIR.join((1, 3), (2, 2)) == (2, 3)
    assert len(PAIR.upto((2, 3))) == 6
    assert PAIR.fmt((2, 3)) == "2->3"
    assert PAIR.parse("2->3") == (2, 3)


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30))
def test_nat_join_is_least_upper_bound(a, b, c):
    j = NP.join(a, b)
    assert NP.leq(a, j) and NP.leq(b, j)
    if NP.leq(a, c) and NP.leq(b, c):
        assert NP.leq(j, c)


def test_structural_descriptions_are_exact():
    assert up(NP, 3).contains(5) and not up(NP, 3).contains(2)
    assert up(NP, 3).upset_large() is True
    assert Finite(NP, (1, 2)).upset_large() is False
    assert empty(NP).upset_large() is False
    both = up(NP, 3) & up(NP, 5)
    assert both.contains(5) and not both.contains(4)
    either = Finite(NP, (1,)) | up(NP, 4)
    assert either.contains(1) and either.contains(9) and not either.contains(2)


def test_predicate_limit_makes_membership_unknown():
    P = Predicate(NP, lambda i: i % 2 == 0, limit=6, label="even")
    assert P.contains(4) is True
    assert P.contains(8) is None
    with pytest.raises(InputError):
        P.materialize(8)


def test_upset_filter_decides_structural_and_windowed_sets():
    F = UpsetFilter(NP)
    assert F.contains(up(NP, 7), 4) is True
    assert F.contains(Finite(NP, (1, 2, 3)), 4) is False
    assert F.contains(Predicate(NP, lambda i: i % 2 == 0, label="even"), 4) is False
    assert F.contains(Predicate(NP, lambda i: i != 3, label="not3"), 4) is True


def test_threshold_graph_sections():
    G = ThresholdGraph(PAIR, lambda i: i + 1, label="j>i")
    assert G.contains((2, 3)) and not G.contains((2, 2))
    assert G.section(2).contains(3) and not G.section(2).contains(2)


def test_product_filter_uses_sections():
    F = ProductFilter(PAIR, UpsetFilter(NP), UpsetFilter(NP))
    assert F.contains(ThresholdGraph(PAIR, lambda i: i), (4, 4)) is True
    nowhere = ThresholdGraph(PAIR, lambda i: None, label="empty")
    assert F.contains(nowhere, (4, 4)) is False
    assert default_filter(PAIR) == F


def test_image_on_collects_targets():
    H = ThresholdGraph(PAIR, lambda i: i + 1)
    img = image_on(H, up(NP, 3), (4, 4))
    assert not img.contains(3) and img.contains(4)


def test_cofinality():
    assert is_cofinal(Predicate(NP, lambda i: i % 3 == 0), 4) is True
    assert is_cofinal(Finite(NP, (1, 2)), 4) is False


def test_filter_laws_on_natplus_and_product():
    rep = check_filter_laws(UpsetFilter(NP), 8, sample_subsets(NP, 8, 20))
    assert rep.ok
    rep = check_filter_laws(ProductFilter(PAIR, UpsetFilter(NP), UpsetFilter(NP)), (4, 4),
                            sample_subsets(PAIR, (4, 4), 20), sample_subsets(NP, 4, 20))
    assert rep.ok and "D" in rep


class _EverythingFilter(UpsetFilter):
    kind = "everything"

    def contains(self, H, bound):
        return True


def test_filter_laws_catch_an_improper_filter():
    rep = check_filter_laws(_EverythingFilter(NP), 4, sample_subsets(NP, 4, 10))
    assert rep.verdict("PROPER").value == "fail"
    assert rep["PROPER"].counterexample == {"set": "{}"}
