import pytest

from potfin.errors import InputError
from potfin.funspace import (Composite, EventuallyConstant, StepFn, Table, check_apx_iso,
                             check_forall_counterexample, check_pt_laws, continuity_report, eval_chain_check,
                             fn_perspace, is_ij_continuous, named_fn, nat_bool_space, per_fn, table_fn)
from potfin.gallery import forall_counterexample
from potfin.perset import BoolPer, NatPer, check_perspace

NAT = NatPer()


def test_eventually_constant_is_normalized():
    f = EventuallyConstant((1, 2, 0, 0), 0, dom=NAT, cod=NAT)
    assert f.prefix == (1, 2)
    assert f == EventuallyConstant((1, 2), 0)
    assert f.name == "[1,2;0...]"
    assert [f(n) for n in range(4)] == [1, 2, 0, 0]
    with pytest.raises(InputError):
        f(-1)


def test_table_fn_from_mapping():
    f = table_fn({"0": 3, "2": 1, "_": 5})
    assert [f(n) for n in range(4)] == [3, 5, 1, 5]
    with pytest.raises(InputError):
        table_fn({"0": -1})


def test_table_and_composite():
    b = BoolPer()
    neg = Table(((False, True), (True, False)), dom=b, cod=b)
    assert neg(True) is False
    assert Composite(neg, neg)(True) is True
    with pytest.raises(InputError):
        Table(((False, True),), dom=b, cod=b)(True)


def test_named_functions():
    assert named_fn("succ")(3) == 4
    assert named_fn("const:7")(100) == 7
    with pytest.raises(InputError):
        named_fn("const:x")
    with pytest.raises(InputError):
        named_fn("nope")


def test_logical_relation_on_nat():
    ident, succ = named_fn("id"), named_fn("succ")
    assert per_fn(ident, ident, (2, 2))
    assert not per_fn(ident, succ, (2, 3))
    assert is_ij_continuous(succ, 2, 3)
    assert not is_ij_continuous(succ, 2, 2)


def test_points_of_the_function_space():
    F = fn_perspace(NAT, NAT, (3, 3))
    assert len(F.points((2, 2))) == 4
    assert len(F.points((3, 3))) == 27
    step = F.Pt(named_fn("succ"), (2, 2))
    assert isinstance(step, EventuallyConstant) and step.name == "[1...]"


def test_bool_domain_points_are_tables():
    F = fn_perspace(BoolPer(), NAT, ("*", 3))
    pts = F.points(("*", 3))
    assert len(pts) == 9
    assert all(isinstance(p, Table) for p in pts)


def test_function_space_is_a_perset():
    F = fn_perspace(NAT, NAT, (3, 3))
    rep = check_perspace(F, "perset", (3, 3))
    assert rep.ok, rep.to_text()


def test_continuity_grid_of_named_functions():
    r = continuity_report(named_fn("id"), (4, 4))
    assert set(r.witnesses) == {(i, j) for i in range(1, 5) for j in range(i, 5)}
    assert r.cross_check and r.filter_verdict is True
    r = continuity_report(named_fn("const:0"), (4, 4))
    assert len(r.witnesses) == 16


def test_forall_is_not_continuous():
    r = continuity_report(named_fn("forall"), ((16, "*"), "*"))
    assert r.witnesses == [] and r.filter_verdict is False
    rep = r.law_report(nat_bool_space().index)
    assert rep.ok and rep["LARGE"].detail == "not continuous"
    for i in (1, 5, 16):
        A, A2 = forall_counterexample(i)
        assert per_fn(A, A2, (i, "*"), (16, "*"))
        assert check_forall_counterexample(i).ok
    with pytest.raises(InputError):
        forall_counterexample(0)


def test_forall_needs_eventually_constant_arguments():
    with pytest.raises(InputError):
        named_fn("forall")(named_fn("id"))


def test_evaluation_chain():
    assert eval_chain_check(named_fn("id"), 2, 3, 3).ok
    assert eval_chain_check(named_fn("succ"), 1, 2, 3).ok
    assert eval_chain_check(EventuallyConstant((4, 0), 2, dom=NAT, cod=NAT), 2, 3, 5).ok
    with pytest.raises(InputError):
        eval_chain_check(named_fn("succ"), 1, 2, 2)
    with pytest.raises(InputError):
        eval_chain_check(named_fn("id"), 5, 3, 3)


def test_point_map_laws():
    F = fn_perspace(NAT, NAT, (3, 3))
    fns = list(F.points((3, 3))) + [named_fn("id"), named_fn("succ")]
    rep = check_pt_laws(F, (3, 3), fns, list(range(10)))
    assert rep.ok
    assert rep.meta["continuous-functions"] >= 28


def test_step_functions_are_constant_on_total_classes():
    s = StepFn(2, ((0, 5), (1, 6)), dom=NAT, cod=NAT)
    assert s(0) == 5 and s(1) == 6 and s(9) == 6


@pytest.mark.parametrize("N,bound", [(NAT, (3, 3)), (BoolPer(), (3, "*"))])
def test_internal_isomorphism(N, bound):
    rep = check_apx_iso(NAT, N, bound)
    assert rep.ok, rep.to_text()
    assert all(a == b for a, b in rep.meta["cardinalities"].values())

