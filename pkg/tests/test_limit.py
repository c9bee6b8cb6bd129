from fractions import Fraction

import pytest

from potfin.errors import InputError
from potfin.gallery import DyadicPoint, bool_system, dyadic_system, nat_system, numeral, shift_family
from potfin.index import up
from potfin.limit import (BoolTarget, ConsistentFamily, DuplicateTarget, DyadicTarget, ElemTarget, NatTarget,
                          apply_consistent, check_target, emb_family, enumerate_dynamic_elements, ext,
                          is_consistent_family, is_maximal_at, maximal_closure)
from potfin.system import function_space

N = nat_system(8)


def test_numerals_are_consistent_families():
    for n in range(4):
        assert is_consistent_family(numeral(N, n), 6)


def test_diagonal_is_not_consistent():
    diag = ConsistentFamily.single(N, lambda i: i - 1, up(N.index, 1), label="diag")
    assert not is_consistent_family(diag, 6)


def test_family_domain_must_match_members():
    lying = ConsistentFamily(N, lambda i: (0,), up(N.index, 3), label="lying")
    with pytest.raises(InputError):
        is_consistent_family(lying, 6)


def test_maximal_closure_fills_in_lower_stages():
    sparse = ConsistentFamily.single(N, lambda i: 2, up(N.index, 5), label="late 2")
    closed = maximal_closure(sparse, 6)
    assert closed.materialize(6) == {3: {2}, 4: {2}, 5: {2}, 6: {2}}
    assert maximal_closure(closed, 6).same_at(closed, 6)
    assert is_maximal_at(closed, 6)
    assert not is_maximal_at(sparse, 6)


def test_emb_family_of_a_state():
    fam = emb_family(N, 3, 1)
    assert fam.at(5) == {1}
    assert is_consistent_family(fam, 6)


def test_dynamic_element_counts():
    assert len(enumerate_dynamic_elements(N, 5)) == 5
    assert len(enumerate_dynamic_elements(dyadic_system(6), 3)) == 8
    assert len(enumerate_dynamic_elements(bool_system(), "*")) == 2


@pytest.mark.parametrize("T,bound", [(NatTarget(nat_system(8)), 8), (BoolTarget(bool_system()), "*"),
                                     (DyadicTarget(dyadic_system(6)), 6), (ElemTarget(nat_system(5), 5), 5)])
def test_targets_satisfy_target_laws(T, bound):
    rep = check_target(T, bound)
    assert rep.ok, rep.to_text()


def test_duplicated_target_is_not_extensional():
    rep = check_target(DuplicateTarget(NatTarget(nat_system(6))), 6)
    assert rep.verdict("TEXTL").value == "fail"
    assert rep["TEXTL"].counterexample


def test_extension_of_a_limit_element():
    T = NatTarget(N)
    fam = ext(T, 3, 8)
    assert fam.materialize(8) == {i: {3} for i in range(4, 9)}
    D = DyadicTarget(dyadic_system(6))
    third = DyadicPoint.from_fraction(Fraction(1, 3))
    assert ext(D, third, 6).at(2) == {D.system.stage(2)[1]}


def test_application_of_function_families():
    F = function_space(N, N)
    ident = shift_family(F, 0)
    assert is_consistent_family(ident, (6, 6))
    for n in range(5):
        assert apply_consistent(ident, numeral(N, n), 6).same_at(numeral(N, n), 6)
    succ = shift_family(F, 1)
    assert apply_consistent(succ, numeral(N, 2), (6, 6)).same_at(numeral(N, 3), 6)


def test_application_needs_a_function_space():
    with pytest.raises(InputError):
        apply_consistent(numeral(N, 1), numeral(N, 1), 4)
