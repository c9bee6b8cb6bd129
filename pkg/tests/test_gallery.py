from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from potfin.errors import InputError
from potfin.gallery import (DyadicPoint, DyadicState, builtin_system, check_dyadic_ep, dyadic_emb, dyadic_proj,
                            dyadic_samples, dyadic_system, nat_system, numeral, shift_family)
from potfin.limit import is_consistent_family
from potfin.system import function_space


def test_dyadic_stage_sizes():
    D = dyadic_system(6)
    assert [len(D.stage(i)) for i in range(7)] == [1, 2, 4, 8, 16, 32, 64]
    assert D.pmap(3, DyadicState(3, 5), 1, DyadicState(1, 1))
    assert not D.pmap(3, DyadicState(3, 5), 1, DyadicState(1, 0))
    with pytest.raises(InputError):
        dyadic_system(17)
    with pytest.raises(InputError):
        DyadicState(2, 4)


def test_third_is_exact():
    third = DyadicPoint.from_fraction(Fraction(1, 3))
    assert third.prefix == () and third.cycle == (0, 1)
    assert str(third) == "0.(01)"
    assert third.value() == Fraction(1, 3)
    assert third.head(4) == 0b0101
    assert not third.is_finite


def test_streams_are_normalized():
    assert DyadicPoint((0, 1, 1), (1,)) == DyadicPoint((0,), (1,))
    assert DyadicPoint((), (0, 1, 0, 1)) == DyadicPoint((), (0, 1))
    # two names for one real stay distinct
    assert DyadicPoint((0,), (1,)) != DyadicPoint((1,), (0,))
    with pytest.raises(InputError):
        DyadicPoint((2,), (0,))


@given(st.fractions(min_value=0, max_value=1, max_denominator=500).filter(lambda q: q < 1))
def test_from_fraction_round_trips(q):
    assert DyadicPoint.from_fraction(q).value() == q


@given(st.integers(0, 10), st.data())
def test_grid_points_project_back(i, data):
    n = data.draw(st.integers(0, 2 ** i - 1))
    a = DyadicState(i, n)
    assert dyadic_proj(i, dyadic_emb(i, a)) == a
    assert dyadic_emb(i, a).value() == a.left


def test_limit_maps_on_samples():
    samples = dyadic_samples(20)
    assert len(set(samples)) == 20
    rep = check_dyadic_ep(samples, depth=10)
    assert rep.ok and rep.meta["samples"] == 20


def test_truncation_is_the_partial_sum():
    third = DyadicPoint.from_fraction(Fraction(1, 3))
    assert third.truncate(4).value() == Fraction(5, 16)
    assert third.truncate(4).is_finite
    assert dyadic_emb(4, dyadic_proj(4, third)) == third.truncate(4)


def test_builtin_lookup():
    assert builtin_system("nat", 5).max_stage == 5
    assert builtin_system("bool").name == "bool"
    with pytest.raises(InputError):
        builtin_system("reals")
    with pytest.raises(InputError):
        nat_system(0)


def test_numerals_and_shift_families():
    N = nat_system(6)
    assert numeral(N, 2).materialize(5) == {3: {2}, 4: {2}, 5: {2}}
    with pytest.raises(InputError):
        numeral(N, -1)
    F = function_space(N, N)
    succ = shift_family(F, 1)
    assert succ.at((2, 2)) == frozenset()
    assert succ.at((2, 3)) == {F.table((2, 3), lambda a: a + 1)}
    assert is_consistent_family(succ, (5, 5))
