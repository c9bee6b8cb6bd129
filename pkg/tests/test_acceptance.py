"""The twelve acceptance criteria, one test each, at their stated tolerances.

Every comparison is exact.  A summary line per criterion is printed at the
end of the run by the hook in ``conftest.py``.
"""
import json
import random
import time

import pytest

from potfin.cli import run
from potfin.funspace import (EventuallyConstant, check_apx_iso, check_forall_counterexample, check_pt_laws,
                             continuity_report, fn_perspace, named_fn)
from potfin.gallery import check_dyadic_ep, dyadic_samples, dyadic_system, nat_system, numeral, shift_family
from potfin.index import NatIndex, ProductFilter, ProductIndex, UpsetFilter, check_filter_laws, sample_subsets
from potfin.limit import TARGET_ANCHORS, apply_consistent, enumerate_dynamic_elements
from potfin.perset import DuplicatePer, DyadicPer, NatPer, check_extensionality, check_perspace
from potfin.stlc import CORPUS, NAT, SATURATING, Models, check_consistency, interpret, parse, reference_value, typecheck
from potfin.system import check_laws, function_space

TARGET_LAWS = set(TARGET_ANCHORS)
SYSTEM_LAWS = {"FUN", "FACTOR", "STAB", "EMBDEF", "PROJDEF", "EPPAIR", "EMBCOH", "PROJCOH", "PSURJ"}


def _cli_json(argv):
    import io
    out, err = io.StringIO(), io.StringIO()
    code = run([*argv, "--format", "json"], out, err)
    return code, json.loads(out.getvalue()) if out.getvalue() else None


def _verdicts(doc):
    return {r["law"]: r["verdict"] for r in doc["results"]}


@pytest.mark.criterion(1, "law suite on nat up to stage 8, under 5 s")
def test_criterion_01_nat_law_suite():
    t0 = time.perf_counter()
    code, doc = _cli_json(["check", "nat", "--laws", "all", "--max-stage", "8"])
    elapsed = time.perf_counter() - t0
    v = _verdicts(doc)
    assert code == 0
    assert SYSTEM_LAWS | TARGET_LAWS <= set(v)
    assert set(v.values()) == {"pass"}
    assert elapsed < 5.0, elapsed


@pytest.mark.criterion(2, "law suite on dyadic up to depth 6 with limit maps on 20 rationals, under 10 s")
def test_criterion_02_dyadic_law_suite():
    assert len(dyadic_system(6).stage(6)) == 64
    t0 = time.perf_counter()
    code, doc = _cli_json(["check", "dyadic", "--laws", "all", "--max-stage", "6"])
    elapsed = time.perf_counter() - t0
    v = _verdicts(doc)
    assert code == 0
    assert SYSTEM_LAWS | TARGET_LAWS | {"DYEP1", "DYEP2"} <= set(v)
    assert set(v.values()) == {"pass"}
    ep = check_dyadic_ep(dyadic_samples(20), depth=10)
    assert ep.ok and ep.meta["samples"] == 20
    assert elapsed < 10.0, elapsed


@pytest.mark.criterion(3, "function space nat -> nat up to (4,4) is a factor system, under 30 s")
def test_criterion_03_function_space_closure():
    t0 = time.perf_counter()
    N = nat_system(8)
    base = check_laws(N, ["FUN", "STAB"], 4)
    assert base.ok
    F = function_space(N, N)
    rep = check_laws(F, "all", (4, 4))
    elapsed = time.perf_counter() - t0
    assert rep.ok, rep.to_text()
    assert SYSTEM_LAWS == {r.law for r in rep.results}
    assert len(F.stage((4, 4))) == 4 ** 4
    assert elapsed < 30.0, elapsed


@pytest.mark.criterion(4, "internal isomorphism certificates for nat -> nat and nat -> bool")
def test_criterion_04_apx_isomorphism():
    from potfin.perset import BoolPer

    for M, N, bound, cell, size in [(NatPer(), NatPer(), (3, 3), "2->2", 4),
                                     (NatPer(), BoolPer(), (3, "*"), "3->*", 8)]:
        rep = check_apx_iso(M, N, bound)
        assert rep.ok, rep.to_text()
        assert {"MONO", "HOM", "STRONG", "EMB", "PROJ", "INJ", "SURJ", "CARD"} <= {r.law for r in rep.results}
        cards = rep.meta["cardinalities"]
        assert all(a == b for a, b in cards.values())
        assert cards[cell] == [size, size]
        assert rep.meta["certificate"]


@pytest.mark.criterion(5, "PER-set laws on nat up to 8 and dyadic up to 6, at least 50 samples")
def test_criterion_05_perset_suite():
    for P, bound in [(NatPer(), 8), (DyadicPer(), 6)]:
        for level in ("fset", "pointed", "perset"):
            rep = check_perspace(P, level, bound)
            assert rep.ok, rep.to_text()
            assert rep.meta["samples"] >= 50
        laws = {r.law for r in rep.results}
        assert {"CHAR", "PT1", "PT2", "PT3", "PTFACTS", "PTCOMM", "EXT1", "EXT2", "EXT3", "EXTFACTS"} <= laws


@pytest.mark.criterion(6, "point map of nat -> nat at (2,2) and (3,3)")
def test_criterion_06_point_map_laws():
    F = fn_perspace(NatPer(), NatPer(), (3, 3))
    for ij, count in [((2, 2), 4), ((3, 3), 27)]:
        pts = F.points(ij)
        assert len(pts) == count
        fns = list(pts) + list(F.samples(F.bound))
        args = list(F.M.points(ij[0])) + list(F.M.samples(ij[0]))
        rep = check_pt_laws(F, ij, fns, args)
        assert rep.ok, rep.to_text()
        assert rep.meta["continuous-functions"] >= count


@pytest.mark.criterion(7, "forall fails continuity at every stage up to 16")
def test_criterion_07_forall_not_continuous():
    for i in range(1, 17):
        assert check_forall_counterexample(i).ok, i
    r = continuity_report(named_fn("forall"), ((16, "*"), "*"))
    assert r.witnesses == []
    assert len(r.grid) == 16


@pytest.mark.criterion(8, "witness grids of 30 random eventually constant functions")
def test_criterion_08_witness_grid_characterization():
    rng = random.Random(20)
    nat = NatPer()
    for _ in range(30):
        prefix = tuple(rng.randint(0, 6) for _ in range(rng.randint(0, 6)))
        f = EventuallyConstant(prefix, rng.randint(0, 6), dom=nat, cod=nat)
        r = continuity_report(f, (5, 5))
        expected = {(i, j) for i in range(1, 6) for j in range(1, 6)
                    if all(f(n) < j for n in range(i))}
        assert set(r.witnesses) == expected, f.name
        assert r.cross_check is True


@pytest.mark.criterion(9, "dynamic elements of nat and dyadic, and the extensionality cross-check")
def test_criterion_09_limits_and_extensionality():
    N = nat_system(8)
    elems = enumerate_dynamic_elements(N, 5)
    assert len(elems) == 5
    assert sorted(tuple(sorted(a.materialize(5).items())) for a in elems) == \
        sorted(tuple(sorted(numeral(N, n).materialize(5).items())) for n in range(5))
    assert len(enumerate_dynamic_elements(dyadic_system(6), 3)) == 8

    plain = check_extensionality(NatPer(), 8)
    assert plain.ok and plain.meta["extensional"] is True
    dup = check_extensionality(DuplicatePer(NatPer()), 8)
    assert dup.verdict("AGREE").value == "pass"
    assert dup.meta["extensional"] is False


@pytest.mark.criterion(10, "applying the identity and successor families to numerals")
def test_criterion_10_application():
    N = nat_system(8)
    F = function_space(N, N)
    ident, succ = shift_family(F, 0), shift_family(F, 1, "succ")
    for n in range(5):
        assert apply_consistent(ident, numeral(N, n), 6).same_at(numeral(N, n), 6), n
    assert apply_consistent(succ, numeral(N, 2), 6).same_at(numeral(N, 3), 6)


@pytest.mark.criterion(11, "typed lambda corpus agrees with the reference evaluator and is consistent")
def test_criterion_11_stlc_corpus():
    assert len(CORPUS) == 12
    models = Models(8)
    for src in CORPUS:
        t = parse(src)
        ty = typecheck(t)
        if ty != NAT:
            continue
        v = reference_value(t)
        for s in range(v + 1, 9):
            assert interpret(t, s, 8, models) == v, (src, s)
            for s2 in range(s, 9):
                assert check_consistency(t, s, s2, 8, models).ok, (src, s, s2)
    F = function_space(nat_system(8), nat_system(8))
    assert interpret(r"\x:nat. x", 3, 8, models) == F.table((3, 3), lambda a: a)
    for src in CORPUS:
        if typecheck(parse(src)) != NAT and src not in SATURATING:
            for s in range(1, 5):
                for s2 in range(s, 5):
                    assert check_consistency(src, s, s2, 8, models).ok, (src, s, s2)


@pytest.mark.criterion(12, "filter laws on the positive integers and their square, with condition D")
def test_criterion_12_filters():
    p = NatIndex(1)
    F = UpsetFilter(p)
    rep = check_filter_laws(F, 8, sample_subsets(p, 8, 20))
    assert rep.ok and all(r.verdict.value == "pass" for r in rep.results), rep.to_text()
    q = ProductIndex((p, p))
    G = ProductFilter(q, F, F)
    rep = check_filter_laws(G, (4, 4), sample_subsets(q, (4, 4), 20), sample_subsets(p, 4, 20))
    assert rep.ok and all(r.verdict.value == "pass" for r in rep.results), rep.to_text()
    assert "D" in rep
