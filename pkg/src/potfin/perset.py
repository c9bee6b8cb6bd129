"""Sets with stage-indexed partial equivalence relations.

A ``PerSpace`` carries a lazily enumerable carrier with relations ``per(a, b, i)``,
optional grid points with a partial map ``pt`` onto them, and optionally a total
extension ``Pt``.  Universal laws are checked on a finite set made of the
supplied samples together with every grid point up to the bound.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .errors import InputError, ResourceError
from .gallery import DyadicPoint, dyadic_samples
from .index import (Index, IndexPoset, NatIndex, Predicate, SubsetDesc, TrivialIndex, default_filter,
                    filter_contains, up)
from .limit import ConsistentFamily, Target, ext, limit_in, maximal_closure, _closure_or_none
from .report import LawReport, Verdict
from .system import RuleSystem, enumeration_cap

LEVELS = ("fset", "pointed", "perset")
POINT_CAP = 4096


class PerSpace:
    """Base class; subclasses override ``per``, ``points``, ``pt`` and ``Pt``."""

    level = "fset"
    #: every class of every relation is a single grid point, so the domain at ``i`` is the points at ``i``
    singleton_classes = False
    #: the domain of every element is a principal up-set generated by ``least_stage``
    principal_domains = False

    def __init__(self, name: str, index: IndexPoset, filter=None):
        self.name = name
        self.index = index
        self.filter = filter if filter is not None else default_filter(index)

    # relations -------------------------------------------------------
    def per(self, a, b, i: Index) -> bool:
        raise NotImplementedError

    def in_dom(self, a, i: Index) -> bool:
        return self.per(a, a, i)

    def domain_desc(self, a) -> SubsetDesc:
        """The stages at which ``a`` is approximated."""
        return Predicate(self.index, lambda i: self.in_dom(a, i), label=f"I({self.name_of(a)})")

    def least_stage(self, a) -> Index | None:
        """The generator when the domain of ``a`` is a principal up-set, else ``None``."""
        return None

    # points ----------------------------------------------------------
    def points(self, i: Index) -> tuple:
        raise InputError(f"{self.name} has no grid points")

    def count_points(self, i: Index) -> int:
        return len(self.points(i))

    def pt(self, a, i: Index):
        """The grid point of ``a`` at ``i``; defined only on the domain of the relation."""
        if not self.in_dom(a, i):
            raise InputError(f"{self.name_of(a)} is not in the domain of the relation at {self.index.fmt(i)}")
        return self.Pt(a, i)

    def Pt(self, a, i: Index):
        raise InputError(f"{self.name} has no total point map")

    def class_key(self, a, i: Index) -> Hashable:
        """Equal for elements that share the total class at ``i``."""
        return self.key(self.Pt(a, i))

    # carrier ---------------------------------------------------------
    def samples(self, bound: Index) -> list:
        return []

    def key(self, a) -> Hashable:
        return a

    def name_of(self, a) -> str:
        return str(a)

    def step_fn(self, i: Index, values: dict, cod: "PerSpace"):
        """The function constant on each total class at ``i`` with ``values`` keyed by point key."""
        from .funspace import StepFn

        return StepFn(i, tuple(sorted(values.items(), key=lambda kv: repr(kv[0]))), dom=self, cod=cod)

    def candidates(self, i: Index, bound: Index) -> list:
        """Finite stand-in for the carrier when checking relations at ``i``."""
        pts = list(self.points(i)) if self.level != "fset" else []
        if len(pts) > POINT_CAP:
            pts = random.Random(0).sample(pts, POINT_CAP)
        return _dedupe(self, pts + list(self.samples(bound)))

    def __repr__(self):
        return f"<PerSpace {self.name}>"


def _dedupe(P: PerSpace, xs) -> list:
    seen, out = set(), []
    for x in xs:
        k = P.key(x)
        if k not in seen:
            seen.add(k)
            out.append(x)
    return out


class NatPer(PerSpace):
    """``n ~_i m`` iff ``n = m < i``; points ``{0..i-1}``; ``Pt_i(n) = min(n, i-1)``."""

    level = "perset"
    singleton_classes = True
    principal_domains = True

    def __init__(self, Pt: Callable[[int, int], int] | None = None, name: str = "nat"):
        super().__init__(name, NatIndex(1))
        self._Pt = Pt

    def per(self, a, b, i):
        return a == b and a < i

    def domain_desc(self, a):
        return up(self.index, a + 1)

    def least_stage(self, a):
        return a + 1

    def points(self, i):
        return tuple(range(i))

    def count_points(self, i):
        return i

    def Pt(self, a, i):
        return self._Pt(a, i) if self._Pt is not None else min(a, i - 1)

    def pt(self, a, i):
        if a >= i:
            raise InputError(f"{a} is not in the domain of the relation at {i}")
        return self.Pt(a, i)

    def class_key(self, a, i):
        return min(a, i - 1)

    def samples(self, bound, n: int = 50):
        base = list(range(2 * bound + 3))
        rng = random.Random(11)
        while len(base) < n:
            base.append(rng.randint(0, 1000))
        return list(dict.fromkeys(base))

    def step_fn(self, i, values, cod):
        from .funspace import EventuallyConstant

        return EventuallyConstant(tuple(values[n] for n in range(i - 1)), values[i - 1], dom=self, cod=cod)


class BoolPer(PerSpace):
    level = "perset"
    singleton_classes = True
    principal_domains = True

    def __init__(self):
        super().__init__("bool", TrivialIndex())

    def per(self, a, b, i):
        return a == b

    def domain_desc(self, a):
        return up(self.index, "*")

    def least_stage(self, a):
        return "*"

    def points(self, i):
        return (False, True)

    def Pt(self, a, i):
        return a

    def class_key(self, a, i):
        return a

    def samples(self, bound):
        return [False, True]

    def name_of(self, a):
        return "true" if a else "false"

    def step_fn(self, i, values, cod):
        from .funspace import Table

        return Table(((False, values[False]), (True, values[True])), dom=self, cod=cod)


class DyadicPer(PerSpace):
    """Bit streams related at depth ``i`` when their first ``i`` bits agree.

    The relation is total, points are the grid points ``n / 2^i`` and both
    point maps truncate to ``i`` bits.  With ``finite_only`` the carrier is
    restricted to streams with finitely many ones.
    """

    level = "perset"
    principal_domains = True

    def __init__(self, depth_cap: int = 16, finite_only: bool = False, sample_count: int = 50):
        super().__init__("dyadic-finite" if finite_only else "dyadic", NatIndex(0, top=depth_cap))
        self.finite_only = finite_only
        self.sample_count = sample_count

    def per(self, a, b, i):
        return a.head(i) == b.head(i)

    def in_dom(self, a, i):
        return True

    def domain_desc(self, a):
        return up(self.index, 0)

    def least_stage(self, a):
        return 0

    def count_points(self, i):
        return 2 ** i

    def points(self, i):
        if 2 ** i > enumeration_cap():
            raise ResourceError(f"{2 ** i} grid points at depth {i} exceed the enumeration cap")
        return tuple(DyadicPoint.grid(i, n) for n in range(2 ** i))

    def Pt(self, a, i):
        return a.truncate(i)

    def pt(self, a, i):
        return a.truncate(i)

    def class_key(self, a, i):
        return a.head(i)

    def samples(self, bound):
        pts = dyadic_samples(self.sample_count)
        if self.finite_only:
            pts = [p.truncate(12) for p in pts]
        return _dedupe(self, pts)


class DuplicatePer(PerSpace):
    """Each element of ``base`` appears twice, tagged 0 and 1; only tag 0 carries points."""

    def __init__(self, base: PerSpace):
        super().__init__(f"dup({base.name})", base.index, base.filter)
        self.base = base
        self.level = base.level
        self.singleton_classes = False

    def per(self, a, b, i):
        return self.base.per(a[1], b[1], i)

    def domain_desc(self, a):
        return self.base.domain_desc(a[1])

    def least_stage(self, a):
        return self.base.least_stage(a[1])

    def points(self, i):
        return tuple((0, p) for p in self.base.points(i))

    def Pt(self, a, i):
        return (0, self.base.Pt(a[1], i))

    def pt(self, a, i):
        return (0, self.base.pt(a[1], i))

    def class_key(self, a, i):
        return self.base.class_key(a[1], i)

    def samples(self, bound):
        return [(t, a) for a in self.base.samples(bound) for t in (0, 1)]

    def key(self, a):
        return (a[0], self.base.key(a[1]))

    def name_of(self, a):
        return f"{self.base.name_of(a[1])}#{a[0]}"


# ---------------------------------------------------------------------------
# spaces induced by targets


class TargetPer(PerSpace):
    """The relations, points and point maps induced by a target."""

    def __init__(self, T: Target, bound: Index):
        super().__init__(f"per({T.name})", T.system.index, T.system.filter)
        self.T = T
        self.bound = bound
        sys = T.system
        self.level = "perset" if (T.has_emb and T.has_proj and sys.has_emb and sys.has_proj) else (
            "pointed" if T.has_emb and sys.has_emb else "fset")

    def _states(self, a, i):
        return self.T.states_of(a, i)

    def _cons(self, i, x, y):
        sys = self.T.system
        if sys.declared_standard:
            return x == y
        C = sys.consistency(i, i, sys.index.join(i, self.bound))
        return bool(C[sys.position(i, x), sys.position(i, y)])

    def per(self, a, b, i):
        return any(self._cons(i, x, y) for x in self._states(a, i) for y in self._states(b, i))

    def in_dom(self, a, i):
        return bool(self._states(a, i))

    def domain_desc(self, a):
        d = self.T.domain_of(a)
        return d if d is not None else super().domain_desc(a)

    def least_stage(self, a):
        d = self.T.domain_of(a)
        gens = getattr(d, "generators", None)
        return gens[0] if gens and len(gens) == 1 else None

    def points(self, i):
        if self.level == "fset":
            raise InputError(f"{self.T.name} has no embeddings, so it has no grid points")
        return tuple(_dedupe(self, [self.T.Emb(i, s) for s in self.T.system.stage(i)]))

    def pt(self, a, i):
        if self.level == "fset":
            raise InputError(f"{self.T.name} has no embeddings, so it has no grid points")
        st = self._states(a, i)
        if not st:
            raise InputError(f"{self.name_of(a)} is not related to any state at {self.index.fmt(i)}")
        return self.T.Emb(i, min(st, key=self.T.system.state_name))

    def Pt(self, a, i):
        if self.level != "perset":
            raise InputError(f"{self.T.name} has no projections, so there is no total point map")
        return self.T.Emb(i, self.T.Proj(i, a))

    def samples(self, bound):
        return list(self.T.samples(bound))

    def key(self, a):
        return self.T.key(a)

    def name_of(self, a):
        return self.T.name_of(a)


def per_from_target(T: Target, bound: Index | None = None, level: str | None = None) -> TargetPer:
    """The space induced by ``T``; ``level`` demands at least that much structure."""
    bound = T.system.max_stage if bound is None else bound
    P = TargetPer(T, bound)
    if level is not None and LEVELS.index(level) > LEVELS.index(P.level):
        raise InputError(f"target {T.name} only supports the {P.level} level, not {level}")
    return P


# ---------------------------------------------------------------------------
# law checking


PER_ANCHORS = {
    "PER": "each relation is symmetric and transitive",
    "DENSE": "every element is approximated at a large set of stages",
    "APPROX": "relatedness at a finer stage implies relatedness at a coarser one on its domain",
    "PT1": "grid points at a stage remain grid points at finer stages",
    "PT2": "related elements share their grid point, which is related to them",
    "PT3": "the finer grid point of an element stays in the coarser domain",
    "PTFACTS": "basic consequences of the point axioms",
    "PTCOMM": "grid points at two comparable stages commute",
    "PTONTO": "the total point map lands in and covers the grid points",
    "EXT1": "the total point map extends the partial one",
    "EXT2": "the coarse total point map factors through the finer one",
    "EXT3": "the finer total point map preserves the coarser domain",
    "CHAR": "density, nested points, shared points, factoring and domain preservation",
    "EXTFACTS": "basic consequences for the total classes",
}


class _PerCtx:
    """Tables over a finite stand-in ``X`` for the carrier."""

    def __init__(self, P: PerSpace, bound: Index, samples, level: str):
        self.P = P
        p = P.index
        self.idx = p.upto(bound)
        self.pairs = [(i, i2) for i in self.idx for i2 in self.idx if p.leq(i, i2)]
        pts = []
        if level != "fset":
            for i in self.idx:
                pts.extend(P.points(i))
        self.X = _dedupe(P, pts + list(samples))
        if len(self.X) > enumeration_cap():
            raise ResourceError(f"{len(self.X)} elements exceed the enumeration cap")
        self.pos = {P.key(x): n for n, x in enumerate(self.X)}
        n = len(self.X)
        self.E = {}
        self.D = {}
        for i in self.idx:
            if P.singleton_classes:
                d = np.array([P.in_dom(x, i) for x in self.X], dtype=bool)
                ks = [P.key(x) for x in self.X]
                E = np.zeros((n, n), dtype=bool)
                for a in np.flatnonzero(d):
                    E[a, a] = True
                    for b in np.flatnonzero(d):
                        if b != a and ks[a] != ks[b] and P.per(self.X[a], self.X[b], i):
                            E[a, b] = True
            else:
                E = np.array([[P.per(x, y, i) for y in self.X] for x in self.X], dtype=bool).reshape(n, n)
            self.E[i] = E
            self.D[i] = np.diag(E).copy()
        self.points = {}
        self.pt = {}
        self.Pt = {}
        if level != "fset":
            for i in self.idx:
                self.points[i] = np.zeros(n, dtype=bool)
                for q in P.points(i):
                    self.points[i][self.pos[P.key(q)]] = True
                row = np.full(n, -1, dtype=np.int64)
                for a in np.flatnonzero(self.D[i]):
                    row[a] = self.index_of(P.pt(self.X[a], i))
                self.pt[i] = row
        if level == "perset":
            for i in self.idx:
                self.Pt[i] = np.array([self.index_of(P.Pt(x, i)) for x in self.X], dtype=np.int64)

    def index_of(self, y) -> int:
        return self.pos.get(self.P.key(y), -2)

    def name(self, a) -> str:
        return self.P.name_of(self.X[a])

    def st(self, i) -> str:
        return self.P.index.fmt(i)


def check_perspace(P: PerSpace, level: str = "perset", bound: Index | None = None,
                   samples: Sequence | None = None) -> LawReport:
    """Check the laws of ``level`` (and every lower level) on samples plus all grid points up to ``bound``."""
    if level not in LEVELS:
        raise InputError(f"unknown level {level!r}; choose from {', '.join(LEVELS)}")
    if LEVELS.index(level) > LEVELS.index(P.level):
        what = "total point map" if level == "perset" else "grid points"
        raise InputError(f"{P.name} has no {what}, so it cannot be checked at the {level} level")
    if bound is None:
        raise InputError("check_perspace needs a bound")
    P.index.validate(bound)
    samples = list(P.samples(bound) if samples is None else samples)
    c = _PerCtx(P, bound, samples, level)
    rep = LawReport(f"{P.name} ({level})", P.index.fmt(bound),
                    meta={"samples": len(samples), "checked-elements": len(c.X),
                          "classes": {c.st(i): _class_count(c.E[i]) for i in c.idx}})
    rep.add("PER", PER_ANCHORS["PER"], _law_per(c))
    rep.add("DENSE", PER_ANCHORS["DENSE"], *_law_dense(P, samples, bound))
    rep.add("APPROX", PER_ANCHORS["APPROX"], _law_approx(c))
    if level in ("pointed", "perset"):
        rep.add("PT1", PER_ANCHORS["PT1"], _law_pt1(c))
        rep.add("PT2", PER_ANCHORS["PT2"], _law_pt2(c))
        rep.add("PT3", PER_ANCHORS["PT3"], _law_pt3(c))
        rep.add("PTFACTS", PER_ANCHORS["PTFACTS"], _law_ptfacts(c))
        rep.add("PTCOMM", PER_ANCHORS["PTCOMM"], _law_ptcomm(c))
    if level == "perset":
        rep.add("PTONTO", PER_ANCHORS["PTONTO"], _law_ptonto(c))
        rep.add("EXT1", PER_ANCHORS["EXT1"], _law_ext1(c))
        rep.add("EXT2", PER_ANCHORS["EXT2"], _law_ext2(c))
        rep.add("EXT3", PER_ANCHORS["EXT3"], _law_ext3(c))
        rep.add("CHAR", PER_ANCHORS["CHAR"], _law_char(c, P, samples, bound))
        rep.add("EXTFACTS", PER_ANCHORS["EXTFACTS"], _law_extfacts(c))
    return rep


def _class_count(E) -> int:
    seen, n = set(), 0
    for a in np.flatnonzero(np.diag(E)):
        if a not in seen:
            seen.update(np.flatnonzero(E[a]).tolist())
            n += 1
    return n


def _law_per(c):
    for i in c.idx:
        E = c.E[i]
        bad = np.argwhere(E != E.T)
        if len(bad):
            a, b = bad[0]
            return {"clause": "symmetric", "stage": c.st(i), "a": c.name(a), "b": c.name(b)}
        Ei = E.astype(np.uint8)
        tr = (Ei @ Ei) > 0
        bad = np.argwhere(tr & ~E)
        if len(bad):
            a, b = bad[0]
            mid = int(np.flatnonzero(E[a] & E[:, b])[0])
            return {"clause": "transitive", "stage": c.st(i), "a": c.name(a), "b": c.name(mid), "c": c.name(b)}
    return None


def _law_dense(P, samples, bound):
    unknown = None
    for a in samples:
        r = filter_contains(P.filter, P.domain_desc(a), bound)
        if r is False:
            return ({"element": P.name_of(a)},)
        if r is None and unknown is None:
            unknown = P.name_of(a)
    if unknown is not None:
        return (None,), {"verdict": Verdict.UNKNOWN, "detail": f"no decision for {unknown}"}
    return (None,)


def _law_approx(c):
    for i, i2 in c.pairs:
        d = c.D[i]
        bad = np.argwhere(c.E[i2] & d[:, None] & d[None, :] & ~c.E[i])
        if len(bad):
            a, b = bad[0]
            return {"fine": c.st(i2), "coarse": c.st(i), "a": c.name(a), "b": c.name(b)}
    return None


def _law_pt1(c):
    for i, i2 in c.pairs:
        bad = np.flatnonzero(c.points[i] & ~c.points[i2])
        if len(bad):
            return {"point": c.name(bad[0]), "stage": c.st(i), "missing-at": c.st(i2)}
    return None


def _law_pt2(c):
    for i in c.idx:
        pt, E, d = c.pt[i], c.E[i], c.D[i]
        for a in np.flatnonzero(d):
            q = pt[a]
            if q < 0 or not c.points[i][q]:
                return {"clause": "lands in the grid points", "stage": c.st(i), "a": c.name(a)}
            if not E[a, q]:
                return {"clause": "related to its point", "stage": c.st(i), "a": c.name(a), "point": c.name(q)}
            for b in np.flatnonzero(E[a]):
                if pt[b] != q:
                    return {"clause": "shared point", "stage": c.st(i), "a": c.name(a), "b": c.name(b)}
        hit = set(pt[d].tolist())
        for q in np.flatnonzero(c.points[i]):
            if q not in hit:
                return {"clause": "surjective", "stage": c.st(i), "point": c.name(q)}
    return None


def _law_pt3(c):
    for i, i2 in c.pairs:
        for a in np.flatnonzero(c.D[i] & c.D[i2]):
            q = c.pt[i2][a]
            if q < 0 or not c.D[i][q]:
                return {"a": c.name(a), "fine": c.st(i2), "coarse": c.st(i)}
    return None


def _law_ptfacts(c):
    for i, i2 in c.pairs:
        pts = np.flatnonzero(c.points[i])
        bad = pts[~c.D[i2][pts]]
        if len(bad):
            return {"part": 1, "point": c.name(bad[0]), "stage": c.st(i), "fine": c.st(i2)}
    for i in c.idx:
        d, E, pt = c.D[i], c.E[i], c.pt[i]
        dom = np.flatnonzero(d)
        same = pt[dom][:, None] == pt[dom][None, :]
        bad = np.argwhere(same != E[np.ix_(dom, dom)])
        if len(bad):
            a, b = dom[bad[0][0]], dom[bad[0][1]]
            return {"part": 2, "stage": c.st(i), "a": c.name(a), "b": c.name(b)}
        for b in dom:
            for a in range(len(c.X)):
                lhs = pt[b] == a
                rhs = bool(c.points[i][a] and E[a, b])
                if lhs != rhs:
                    return {"part": 3, "stage": c.st(i), "point": c.name(a), "b": c.name(b)}
    for i, i2 in c.pairs:
        for a in np.flatnonzero(c.points[i]):
            if c.pt[i2][a] != a:
                return {"part": 4, "point": c.name(a), "stage": c.st(i), "fine": c.st(i2)}
        for a in np.flatnonzero(c.D[i]):
            q = c.pt[i][a]
            if c.pt[i2][q] != q:
                return {"part": 5, "a": c.name(a), "stage": c.st(i), "fine": c.st(i2)}
    return None


def _law_ptcomm(c):
    for i, i2 in c.pairs:
        for a in np.flatnonzero(c.D[i] & c.D[i2]):
            lo, hi = c.pt[i][a], c.pt[i2][a]
            if hi < 0 or not c.D[i][hi] or c.pt[i][hi] != lo:
                return {"order": "coarse after fine", "a": c.name(a), "stages": [c.st(i), c.st(i2)]}
            if c.pt[i2][lo] != lo:
                return {"order": "fine after coarse", "a": c.name(a), "stages": [c.st(i), c.st(i2)]}
    return None


def _law_ptonto(c):
    for i in c.idx:
        Pt = c.Pt[i]
        bad = np.flatnonzero((Pt < 0) | ~c.points[i][np.maximum(Pt, 0)])
        if len(bad):
            return {"clause": "into", "stage": c.st(i), "a": c.name(bad[0])}
        missing = np.flatnonzero(c.points[i] & ~np.isin(np.arange(len(c.X)), Pt))
        if len(missing):
            return {"clause": "onto", "stage": c.st(i), "point": c.name(missing[0])}
    return None


def _law_ext1(c):
    for i in c.idx:
        d = c.D[i]
        bad = np.flatnonzero(d & (c.Pt[i] != c.pt[i]))
        if len(bad):
            return {"stage": c.st(i), "a": c.name(bad[0])}
    return None


def _compose(outer, inner):
    """``outer . inner`` on index arrays; ``-2`` marks a value outside the checked set."""
    out = np.full_like(inner, -2)
    ok = inner >= 0
    out[ok] = outer[inner[ok]]
    return out


def _law_ext2(c):
    for i, i2 in c.pairs:
        bad = np.flatnonzero(_compose(c.Pt[i], c.Pt[i2]) != c.Pt[i])
        if len(bad):
            return {"a": c.name(bad[0]), "coarse": c.st(i), "fine": c.st(i2)}
    return None


def _law_ext3(c):
    for i, i2 in c.pairs:
        for a in np.flatnonzero(c.D[i]):
            q = c.Pt[i2][a]
            if q < 0 or not c.D[i][q]:
                return {"a": c.name(a), "coarse": c.st(i), "fine": c.st(i2)}
    return None


def _law_char(c, P, samples, bound):
    cex = _law_dense(P, samples, bound)[0]
    if cex is not None:
        return dict(cex, clause=1)
    cex = _law_pt1(c)
    if cex is not None:
        return dict(cex, clause=2)
    for i in c.idx:
        Pt, E = c.Pt[i], c.E[i]
        for a in np.flatnonzero(c.D[i]):
            for b in np.flatnonzero(E[a]):
                q = Pt[a]
                if q < 0 or not E[a, q] or Pt[a] != Pt[b]:
                    return {"clause": 3, "stage": c.st(i), "a": c.name(a), "b": c.name(b),
                            "Pt(a)": c.name(q) if q >= 0 else "outside"}
    cex = _law_ext2(c)
    if cex is not None:
        return dict(cex, clause=4)
    cex = _law_ext3(c)
    if cex is not None:
        return dict(cex, clause=5)
    return None


def _law_extfacts(c):
    n = len(c.X)
    for i, i2 in c.pairs:
        Pi, Pi2 = c.Pt[i], c.Pt[i2]
        perp_i = Pi[:, None] == Pi[None, :]
        perp_i2 = Pi2[:, None] == Pi2[None, :]
        bad = np.argwhere(perp_i2 & ~perp_i)
        if len(bad):
            a, b = bad[0]
            return {"part": 1, "a": c.name(a), "b": c.name(b), "stages": [c.st(i), c.st(i2)]}
        d = c.D[i]
        expect = perp_i & d[:, None] & d[None, :]
        bad = np.argwhere(expect != c.E[i])
        if len(bad):
            a, b = bad[0]
            return {"part": 2, "a": c.name(a), "b": c.name(b), "stage": c.st(i)}
        for a in range(n):
            q = Pi2[a]
            if q < 0 or Pi[q] != Pi[a]:
                return {"part": 3, "clause": "same total class", "a": c.name(a), "stages": [c.st(i), c.st(i2)]}
            if d[a] and not c.E[i][a, q]:
                return {"part": 3, "clause": "related", "a": c.name(a), "stages": [c.st(i), c.st(i2)]}
        for a, b in np.argwhere(c.E[i]):
            qa, qb = Pi2[a], Pi2[b]
            if qa < 0 or qb < 0 or not c.E[i][qa, qb]:
                return {"part": 4, "a": c.name(a), "b": c.name(b), "stages": [c.st(i), c.st(i2)]}
        for a in np.flatnonzero(c.points[i]):
            if Pi2[a] != a:
                return {"part": 5, "point": c.name(a), "stages": [c.st(i), c.st(i2)]}
        fine_coarse = _compose(Pi2, Pi)
        coarse_fine = _compose(Pi, Pi2)
        bad = np.flatnonzero((fine_coarse != Pi) | (coarse_fine != Pi))
        if len(bad):
            return {"part": 6, "a": c.name(bad[0]), "stages": [c.st(i), c.st(i2)]}
        for a in np.flatnonzero(d):
            q = Pi2[a]
            if q < 0 or not d[q] or c.pt[i][q] != c.pt[i][a]:
                return {"part": 7, "a": c.name(a), "stages": [c.st(i), c.st(i2)]}
    return None


# ---------------------------------------------------------------------------
# internal systems


def internal_system(P: PerSpace, bound: Index, level: str | None = None) -> RuleSystem:
    """The system of approximations carried by ``P``.

    At the ``fset`` level stages are the classes met by the samples and the
    points up to ``bound``; two classes are related when they overlap.  At the
    ``pointed`` level stages are the grid points, related through ``pt`` and
    embedded by inclusion; at the ``perset`` level ``Pt`` supplies projections.
    """
    level = P.level if level is None else level
    if LEVELS.index(level) > LEVELS.index(P.level):
        raise InputError(f"{P.name} does not support the {level} level")
    name = f"APX({P.name})"
    if level == "fset":
        return _class_system(P, bound, name)

    by_key: dict = {}

    def stage(i):
        pts = tuple(P.points(i))
        by_key[i] = {P.key(q): q for q in pts}
        return pts

    def lookup(i, q):
        if i not in by_key:
            stage(i)
        try:
            return by_key[i][P.key(q)]
        except KeyError:
            raise InputError(f"{P.name_of(q)} is not a grid point at {P.index.fmt(i)}") from None

    def pmap(i2, a2, i, a):
        return P.in_dom(a2, i) and P.key(P.pt(a2, i)) == P.key(a)

    return RuleSystem(
        name, P.index, stage=stage, pmap=pmap,
        emb=lambda i, i2, a: lookup(i2, a),
        proj=(lambda i2, i, a: lookup(i, P.Pt(a, i))) if level == "perset" else None,
        state_name=P.name_of, filter=P.filter, max_stage=bound, standard=True)


def _class_system(P: PerSpace, bound: Index, name: str) -> RuleSystem:
    X = _dedupe(P, list(P.samples(bound)) + (
        [q for i in P.index.upto(bound) for q in P.points(i)] if P.level != "fset" else []))
    keys = [P.key(x) for x in X]

    def stage(i):
        classes, seen = [], set()
        for x, k in zip(X, keys):
            if k in seen or not P.in_dom(x, i):
                continue
            cls = frozenset(k2 for y, k2 in zip(X, keys) if P.per(x, y, i))
            seen |= cls
            classes.append(cls)
        return tuple(classes)

    return RuleSystem(name, P.index, stage=stage, pmap=lambda i2, A2, i, A: bool(A2 & A),
                      state_name=lambda A: "{" + ",".join(sorted(map(str, A))) + "}",
                      filter=P.filter, max_stage=bound, standard=True)


class InternalTarget(Target):
    """The carrier of ``P`` over its internal system, related through ``pt``."""

    def __init__(self, P: PerSpace, bound: Index, level: str | None = None):
        level = P.level if level is None else level
        super().__init__(internal_system(P, bound, level), f"{P.name} over its points")
        self.P = P
        self.bound = bound
        self.level = level
        self.has_emb = level != "fset"
        self.has_proj = level == "perset"

    def rel(self, a, i, s):
        return self.P.in_dom(a, i) and (self.P.key(self.P.pt(a, i)) == self.P.key(s) if self.has_emb
                                        else self.P.key(a) in s)

    def states_of(self, a, i):
        if not self.P.in_dom(a, i):
            return []
        if self.has_emb:
            return [self.P.pt(a, i)]
        return [s for s in self.system.stage(i) if self.P.key(a) in s]

    def samples(self, bound):
        return list(self.P.samples(bound))

    def Emb(self, i, s):
        return s

    def Proj(self, i, a):
        return self.system.proj(i, i, self.P.Pt(a, i)) if self.has_proj else super().Proj(i, a)

    def eq(self, a, b):
        return self.P.key(a) == self.P.key(b)

    def key(self, a):
        return self.P.key(a)

    def name_of(self, a):
        return self.P.name_of(a)

    def domain_of(self, a):
        return self.P.domain_desc(a)


# ---------------------------------------------------------------------------
# extensionality


EXTL_ANCHORS = {
    "C1": "elements with equivalent extensions over the points are equal",
    "C2": "elements related at cofinally many stages are equal",
    "C3": "elements related wherever both are approximated are equal",
    "C4": "elements in the same classes are equal",
    "AGREE": "the four formulations of extensionality agree",
}


def check_extensionality(P: PerSpace, bound: Index, samples: Sequence | None = None) -> LawReport:
    """Evaluate four equivalent formulations of extensionality on sample pairs.

    Pairs are compared at the stages up to the horizon of ``bound``; pairs
    never approximated together there are not comparable and are skipped.
    Each formulation fails with the first pair of distinct elements it cannot
    tell apart; ``AGREE`` checks that all four reach the same verdict.
    """
    p = P.index
    samples = _dedupe(P, list(P.samples(bound) if samples is None else samples))
    reach = p.horizon(bound)
    stages = p.upto(reach)
    order = {i: n for n, i in enumerate(stages)}
    pointed = P.level != "fset"
    fam: dict = {}

    def doms(a):
        return {i for i in stages if P.in_dom(a, i)}

    def cls(a, i):
        k = ("cls", P.key(a), i)
        if k not in fam:
            fam[k] = frozenset(P.key(y) for y in samples if P.per(a, y, i))
        return fam[k]

    def c1(a, b, common):
        if pointed:
            return all(P.key(P.pt(a, i)) == P.key(P.pt(b, i)) for i in common)
        return all(P.per(a, b, i) for i in common)

    def c2(a, b, common):
        return all(any(P.per(a, b, k) for k in common if p.leq(i, k)) for i in p.upto(bound) if
                   any(p.leq(i, k) for k in common))

    def c3(a, b, common):
        return all(P.per(a, b, i) for i in common)

    def c4(a, b, common):
        return all(cls(a, i) == cls(b, i) for i in common)

    clauses = {"C1": c1, "C2": c2, "C3": c3, "C4": c4}
    found: dict = {k: None for k in clauses}
    skipped = 0
    for x in range(len(samples)):
        for y in range(x + 1, len(samples)):
            a, b = samples[x], samples[y]
            common = sorted(doms(a) & doms(b), key=order.__getitem__)
            if not common:
                skipped += 1
                continue
            for law, fn in clauses.items():
                if found[law] is None and fn(a, b, common):
                    found[law] = {"a": P.name_of(a), "b": P.name_of(b), "compared-up-to": p.fmt(reach)}
    rep = LawReport(f"extensionality of {P.name}", p.fmt(bound),
                    meta={"samples": len(samples), "pairs-not-comparable": skipped})
    for law in clauses:
        rep.add(law, EXTL_ANCHORS[law], found[law])
    verdicts = {law: found[law] is None for law in clauses}
    agree = len(set(verdicts.values())) == 1
    rep.add("AGREE", EXTL_ANCHORS["AGREE"], None if agree else {"extensional": verdicts})
    rep.meta["extensional"] = verdicts["C3"] if agree else None
    return rep


# ---------------------------------------------------------------------------
# convergence and completeness


NONE_AT_BOUND = "none-at-bound"


@dataclass(frozen=True)
class PointSequence:
    """A grid point for every stage of ``domain``, as a lazy map."""

    entries: Callable[[Index], Any]
    domain: SubsetDesc
    label: str = "sequence"

    def at(self, i):
        return self.entries(i) if self.domain.contains(i) else None


def check_sequence(P: PerSpace, s: PointSequence, bound: Index) -> None:
    """Raise ``InputError`` unless the sequence is convergent up to ``bound``."""
    p = P.index
    idx = [i for i in p.upto(bound) if s.domain.contains(i)]
    for i in idx:
        q = s.at(i)
        # a grid point is exactly an element of the domain that is its own point
        if not (P.in_dom(q, i) and P.key(P.pt(q, i)) == P.key(q)):
            raise InputError(f"{s.label}: {P.name_of(q)} is not a grid point at {p.fmt(i)}")
    for i in idx:
        for i2 in idx:
            if i != i2 and p.leq(i, i2):
                hi = s.at(i2)
                if not P.in_dom(hi, i):
                    raise InputError(f"{s.label} is not convergent: the point at {p.fmt(i2)} has no "
                                     f"grid point at {p.fmt(i)}")
                if P.key(P.pt(hi, i)) != P.key(s.at(i)):
                    raise InputError(f"{s.label} is not convergent: the point at {p.fmt(i2)} does not "
                                     f"reduce to the point at {p.fmt(i)}")
    if filter_contains(P.filter, s.domain, bound) is False:
        raise InputError(f"{s.label} is not defined on a large set of stages")


def limit_element(P: PerSpace, s: PointSequence, bound: Index, candidates: Sequence | None = None):
    """An element whose grid points follow ``s``, or ``NONE_AT_BOUND``.

    Candidates are the samples and grid points up to ``bound``; a candidate
    is accepted when it matches every entry up to the horizon of the bound.
    """
    check_sequence(P, s, bound)
    p = P.index
    reach = p.horizon(bound)
    idx = [i for i in p.upto(reach) if s.domain.contains(i)]
    if candidates is None:
        candidates = list(P.samples(bound)) + [q for i in p.upto(bound) for q in P.points(i)]
    for a in _dedupe(P, candidates):
        if all(P.in_dom(a, i) and P.key(P.pt(a, i)) == P.key(s.at(i)) for i in idx):
            return a
    return NONE_AT_BOUND


def emb_sequence(T: Target, alpha: ConsistentFamily) -> PointSequence:
    """``(Emb_i(a_i))`` for the states ``a_i`` of ``alpha``."""

    def entry(i):
        st = alpha.at(i)
        if not st:
            raise InputError(f"{alpha.label} has no state at {T.system.index.fmt(i)}")
        return T.Emb(i, min(st, key=T.system.state_name))

    return PointSequence(entry, alpha.domain, label=f"Emb[{alpha.label}]")


BRIDGE_ANCHORS = {
    "BRIDGE": "embedded consistent families are convergent sequences of points",
    "COMPL1": "every consistent family has a limit element in the target",
    "COMPL2": "each convergent point sequence converges to some element",
    "COMPL3": "every consistent family of points has a limit over the internal system",
    "AGREE": "the three formulations of completeness agree",
}


def check_convergence_bridge(T: Target, bound: Index, samples: Sequence | None = None,
                             families: Sequence[ConsistentFamily] | None = None) -> LawReport:
    """Relate consistent families, convergent sequences and the three completeness formulations."""
    from .limit import enumerate_dynamic_elements

    if not (T.has_emb and T.system.has_emb):
        raise InputError(f"target {T.name} has no embeddings")
    sys = T.system
    p = sys.index
    samples = list(T.samples(bound) if samples is None else samples)
    P = per_from_target(T, bound)
    if families is None:
        families = enumerate_dynamic_elements(sys, bound)
    families = list(families)
    I = InternalTarget(P, bound, "pointed")
    reach = p.horizon(bound)

    rep = LawReport(f"convergence over {T.name}", p.fmt(bound),
                    meta={"families": len(families), "samples": len(samples)})
    cex = None
    for alpha in families:
        for i in p.upto(reach):
            pts = {T.key(T.Emb(i, a)) for a in alpha.at(i)}
            if len(pts) > 1:
                cex = {"family": alpha.label, "stage": p.fmt(i), "reason": "states embed to different points"}
                break
        if cex:
            break
        try:
            check_sequence(P, emb_sequence(T, alpha), reach)
        except InputError as e:
            cex = {"family": alpha.label, "reason": str(e)}
            break
    rep.add("BRIDGE", BRIDGE_ANCHORS["BRIDGE"], cex)

    cands = list(samples) + [P_q for i in p.upto(bound) for P_q in P.points(i)]
    c1 = c2 = c3 = None
    for alpha in families:
        if c1 is None and limit_in(T, samples, alpha, bound) is None:
            c1 = {"family": alpha.label}
        if c2 is None and limit_element(P, emb_sequence(T, alpha), bound, cands) == NONE_AT_BOUND:
            c2 = {"sequence": f"Emb[{alpha.label}]"}
        if c3 is None:
            seq = emb_sequence(T, alpha)
            pts = ConsistentFamily(I.system, lambda i, seq=seq: (lambda q: (q,) if q is not None else ())(seq.at(i)),
                                   alpha.domain, label=f"points({alpha.label})")
            if limit_in(I, _dedupe(P, cands), pts, bound) is None:
                c3 = {"family": pts.label}
    rep.add("COMPL1", BRIDGE_ANCHORS["COMPL1"], c1)
    rep.add("COMPL2", BRIDGE_ANCHORS["COMPL2"], c2)
    rep.add("COMPL3", BRIDGE_ANCHORS["COMPL3"], c3)
    verdicts = [c1 is None, c2 is None, c3 is None]
    rep.add("AGREE", BRIDGE_ANCHORS["AGREE"],
            None if len(set(verdicts)) == 1 else {"complete": dict(zip(("COMPL1", "COMPL2", "COMPL3"), verdicts))})
    rep.meta["complete"] = verdicts[0] if len(set(verdicts)) == 1 else None
    return rep
