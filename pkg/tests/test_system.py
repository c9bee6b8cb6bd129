import pytest

from potfin.errors import InputError, ResourceError
from potfin.gallery import bool_system, collapse_hom, dyadic_system, nat_system, parity_system
from potfin.index import NatIndex
from potfin.system import (FunctionSpace, RuleSystem, check_hom, check_laws, consistent, function_space,
                           identity_hom, resolve_laws)


def test_nat_stages_and_maps():
    N = nat_system(8)
    assert N.stage(3) == (0, 1, 2)
    assert N.pmap(5, 2, 3, 2) and not N.pmap(5, 4, 3, 2)
    assert N.emb(3, 5, 2) == 2
    assert N.proj(5, 3, 4) == 2


def test_consistency_searches_common_refinements():
    N = nat_system(8)
    assert consistent(N, 2, 3, 2, 5)
    assert not consistent(N, 1, 3, 2, 5)
    # 2 at stage 3 has no refinement that projects to 2 at stage 2 (which does not exist)
    with pytest.raises(InputError):
        consistent(N, 2, 2, 2, 3)


@pytest.mark.parametrize("make,bound", [(lambda: nat_system(8), 8), (bool_system, "*"),
                                        (lambda: dyadic_system(6), 6), (lambda: parity_system(4), 4)])
def test_builtin_systems_pass_every_law(make, bound):
    rep = check_laws(make(), "all", bound)
    assert rep.ok, rep.to_text()


def test_broken_projection_is_caught_with_a_counterexample():
    N = nat_system(6)
    bad = N.with_maps("nat-bad-proj", proj=lambda i2, i, a: 0)
    rep = check_laws(bad, "all", 5)
    assert not rep.ok
    for r in rep.failures:
        assert r.counterexample
    assert {r.law for r in rep.failures} & {"PROJDEF", "EPPAIR", "PROJCOH"}


def test_non_refining_relation_breaks_factor_law():
    # every state refines every state below, but only equal states are consistent within a stage
    loose = RuleSystem("loose", NatIndex(1), stage=lambda i: range(2),
                       pmap=lambda i2, a2, i, a: i2 != i or a2 == a, max_stage=4)
    rep = check_laws(loose, ["FUN", "FACTOR", "STAB"], 4)
    assert not rep.ok


def test_law_selection():
    N = nat_system(4)
    assert resolve_laws(N, "fun, stab") == ["FUN", "STAB"]
    with pytest.raises(InputError):
        resolve_laws(N, "nope")
    no_maps = RuleSystem("bare", NatIndex(1), stage=lambda i: (0,), pmap=lambda *a: True, max_stage=3)
    with pytest.raises(InputError):
        resolve_laws(no_maps, "EMBDEF")
    assert "EMBDEF" not in {r.law for r in check_laws(no_maps, "all", 3).results}


def test_function_space_sizes_and_tables():
    N = nat_system(8)
    F = function_space(N, N)
    assert isinstance(F, FunctionSpace)
    assert len(F.stage((2, 2))) == 4
    assert len(F.stage((3, 2))) == 8
    ident = F.table((3, 3), lambda a: a)
    assert ident in F.stage((3, 3))
    assert F.state_name(ident) == "{0->0,1->1,2->2}"
    # refinement of tables is the logical relation
    assert F.pmap((4, 4), F.table((4, 4), lambda a: a), (2, 2), F.table((2, 2), lambda a: a))
    assert not F.pmap((4, 4), F.table((4, 4), lambda a: min(a + 1, 3)), (2, 2), F.table((2, 2), lambda a: 1))


def test_function_space_laws_over_bool():
    F = function_space(nat_system(4), bool_system())
    assert check_laws(F, "all", (3, "*")).ok


def test_function_space_respects_the_cap(monkeypatch):
    monkeypatch.setenv("POTFIN_CAP", "20")
    N = nat_system(8)
    F = function_space(N, N)
    with pytest.raises(ResourceError):
        F.stage((3, 3))


def test_identity_hom_and_collapse():
    N = nat_system(5)
    assert check_hom(identity_hom(), N, N, 5).ok
    rep = check_hom(collapse_hom(), N, parity_system(5), 5)
    assert rep.verdict("HOM").value == "fail"
    assert rep["HOM"].counterexample
    # undeclared properties are skipped, not failed
    assert rep.verdict("INJ").value == "skip"


def test_check_laws_is_deterministic():
    N = nat_system(5)
    a, b = check_laws(N, "all", 5), check_laws(N, "all", 5)
    assert a.to_json() == b.to_json()
