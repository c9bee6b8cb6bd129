from fractions import Fraction

import pytest

from potfin.errors import InputError
from potfin.gallery import DyadicPoint, bool_system, dyadic_system, nat_system
from potfin.index import up
from potfin.limit import BoolTarget, DyadicTarget, NatTarget, check_target, ext
from potfin.perset import (NONE_AT_BOUND, BoolPer, DuplicatePer, DyadicPer, InternalTarget, NatPer, PointSequence,
                           check_convergence_bridge, check_extensionality, check_perspace, check_sequence, emb_sequence,
                           internal_system, limit_element, per_from_target)
from potfin.system import check_laws


def test_nat_relation_points_and_point_maps():
    P = NatPer()
    assert P.per(2, 2, 3) and not P.per(2, 2, 2) and not P.per(1, 2, 5)
    assert P.points(3) == (0, 1, 2)
    assert P.pt(1, 3) == 1
    assert P.Pt(7, 3) == 2
    with pytest.raises(InputError):
        P.pt(5, 3)


@pytest.mark.parametrize("P,bound", [(NatPer(), 8), (DyadicPer(), 6), (BoolPer(), "*")])
@pytest.mark.parametrize("level", ["fset", "pointed", "perset"])
def test_builtin_spaces_pass(P, bound, level):
    rep = check_perspace(P, level, bound)
    assert rep.ok, rep.to_text()


def test_constant_point_map_breaks_the_total_laws():
    bad = NatPer(Pt=lambda a, i: 0, name="nat-Pt0")
    rep = check_perspace(bad, "perset", 6)
    failed = {r.law for r in rep.failures}
    assert {"PT2", "PTONTO", "CHAR"} <= failed
    assert rep["CHAR"].counterexample["clause"] == 3
    # the fset level does not look at points at all
    assert check_perspace(bad, "fset", 6).ok


def test_duplicated_carrier_is_still_a_perset():
    assert check_perspace(DuplicatePer(NatPer()), "perset", 6).ok


@pytest.mark.parametrize("T,bound", [(NatTarget(nat_system(8)), 8), (DyadicTarget(dyadic_system(6)), 6),
                                     (BoolTarget(bool_system()), "*")])
def test_spaces_induced_by_targets(T, bound):
    P = per_from_target(T, bound)
    assert P.level == "perset"
    assert check_perspace(P, "perset", bound).ok


@pytest.mark.parametrize("level", ["fset", "pointed", "perset"])
def test_internal_system_of_nat(level):
    S = internal_system(NatPer(), 5, level)
    assert check_laws(S, "all", 5).ok
    if level != "fset":
        assert S.stage(3) == (0, 1, 2)
    if level == "perset":
        assert S.proj(5, 3, 4) == 2


def test_internal_target_is_a_target():
    assert check_target(InternalTarget(NatPer(), 6), 6).ok


def test_extensionality_cross_check():
    rep = check_extensionality(NatPer(), 8)
    assert rep.ok and rep.meta["extensional"] is True
    for base in (NatPer(), DyadicPer()):
        dup = check_extensionality(DuplicatePer(base), 6)
        assert {r.law for r in dup.failures} == {"C1", "C2", "C3", "C4"}
        assert dup.verdict("AGREE").value == "pass"


def test_limit_of_a_convergent_sequence():
    P = NatPer()
    const2 = PointSequence(lambda i: 2, up(P.index, 3), "const 2")
    assert limit_element(P, const2, 8) == 2


def test_diagonal_sequence_is_not_convergent():
    P = NatPer()
    diag = PointSequence(lambda i: i - 1, up(P.index, 1), "diagonal")
    with pytest.raises(InputError):
        check_sequence(P, diag, 8)
    with pytest.raises(InputError):
        limit_element(P, diag, 8)


def test_sequence_entries_must_be_grid_points():
    P = DyadicPer()
    third = DyadicPoint.from_fraction(Fraction(1, 3))
    with pytest.raises(InputError):
        check_sequence(P, PointSequence(lambda i: third, up(P.index, 0), "not points"), 4)


def test_nat_is_complete():
    rep = check_convergence_bridge(NatTarget(nat_system(8)), 8)
    assert rep.ok and rep.meta["complete"] is True


def test_finite_bit_dyadics_are_not_complete():
    full = DyadicTarget(dyadic_system(6))
    third = ext(full, DyadicPoint.from_fraction(Fraction(1, 3)), 6)
    finite = DyadicTarget(dyadic_system(6), finite_only=True)
    rep = check_convergence_bridge(finite, 6, families=[third])
    assert rep.meta["complete"] is False
    assert {r.law for r in rep.failures} == {"COMPL1", "COMPL2", "COMPL3"}
    assert rep.verdict("AGREE").value == "pass"
    assert rep.verdict("BRIDGE").value == "pass"
    P = per_from_target(finite, 6)
    assert limit_element(P, emb_sequence(finite, third), 6) == NONE_AT_BOUND
    # the same family does have a limit among all eventually periodic streams
    assert check_convergence_bridge(full, 6, families=[third]).meta["complete"] is True
