"""Functions between PER spaces: continuity, step functions and the function space.

Functions are values only through finite descriptions with a total
evaluation, so relations and point maps on them stay computable.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

from .errors import InputError, ResourceError
from .index import (Finite, Index, Predicate, ProductFilter, ProductIndex, SubsetDesc, ThresholdGraph,
                    filter_contains)
from .perset import POINT_CAP, BoolPer, NatPer, PerSpace, _dedupe, internal_system
from .report import LawReport, Verdict
from .system import SystemHom, check_hom, enumeration_cap, function_space


# ---------------------------------------------------------------------------
# described functions


class DescribedFn:
    """A function given by a finite description; ``dom`` and ``cod`` are PER spaces."""

    dom: Any
    cod: Any

    def __call__(self, a):
        raise NotImplementedError

    @property
    def name(self) -> str:
        return repr(self)

    def __str__(self):
        return self.name


def _show(space, v) -> str:
    return space.name_of(v) if space is not None else str(v)


@dataclass(frozen=True, repr=False, eq=True)
class EventuallyConstant(DescribedFn):
    """``n -> prefix[n]`` below ``len(prefix)`` and ``tail`` from there on."""

    prefix: tuple = ()
    tail: Any = 0
    dom: Any = field(default=None, compare=False)
    cod: Any = field(default=None, compare=False)

    def __post_init__(self):
        pre = tuple(self.prefix)
        while pre and pre[-1] == self.tail:
            pre = pre[:-1]
        object.__setattr__(self, "prefix", pre)

    def __call__(self, n):
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise InputError(f"{self.name} expects a natural number, got {n!r}")
        return self.prefix[n] if n < len(self.prefix) else self.tail

    @property
    def name(self):
        vals = ",".join(_show(self.cod, v) for v in self.prefix)
        return f"[{vals}{';' if vals else ''}{_show(self.cod, self.tail)}...]"

    def __repr__(self):
        return f"EventuallyConstant({self.name})"


@dataclass(frozen=True, repr=False)
class Table(DescribedFn):
    """A finite table with an optional default for arguments outside it."""

    items: tuple = ()
    default: Any = None
    dom: Any = field(default=None, compare=False)
    cod: Any = field(default=None, compare=False)

    def __call__(self, a):
        for k, v in self.items:
            if k == a:
                return v
        if self.default is None:
            raise InputError(f"{_show(self.dom, a)} is outside the table {self.name}")
        return self.default

    @property
    def name(self):
        body = ",".join(f"{_show(self.dom, k)}->{_show(self.cod, v)}" for k, v in self.items)
        if self.default is not None:
            body += f",_->{_show(self.cod, self.default)}"
        return "{" + body + "}"

    def __repr__(self):
        return f"Table({self.name})"


@dataclass(frozen=True, repr=False)
class Rule(DescribedFn):
    """A named closed-form function such as ``id`` or ``succ``."""

    label: str
    fn: Callable = field(compare=False)
    dom: Any = field(default=None, compare=False)
    cod: Any = field(default=None, compare=False)

    def __call__(self, a):
        return self.fn(a)

    @property
    def name(self):
        return self.label

    def __repr__(self):
        return f"Rule({self.label})"


@dataclass(frozen=True, repr=False)
class Composite(DescribedFn):
    """``outer . inner``."""

    outer: DescribedFn
    inner: DescribedFn

    @property
    def dom(self):
        return self.inner.dom

    @property
    def cod(self):
        return self.outer.cod

    def __call__(self, a):
        return self.outer(self.inner(a))

    @property
    def name(self):
        return f"{self.outer.name} . {self.inner.name}"


@dataclass(frozen=True, repr=False)
class StepFn(DescribedFn):
    """Constant on each total class at ``stage``; ``items`` map point keys to values."""

    stage: Any
    items: tuple
    dom: Any = field(default=None, compare=False)
    cod: Any = field(default=None, compare=False)

    def __call__(self, a):
        k = self.dom.key(self.dom.Pt(a, self.stage))
        for kk, v in self.items:
            if kk == k:
                return v
        raise InputError(f"step function at {self.stage} has no value for the class of {a!r}")

    @property
    def name(self):
        return "step{" + ",".join(f"{k}->{_show(self.cod, v)}" for k, v in self.items) + "}"


@dataclass(frozen=True, repr=False)
class ForallFn(DescribedFn):
    """``A -> true`` iff ``A(n)`` is true for every ``n``, on eventually constant ``A``."""

    dom: Any = field(default=None, compare=False)
    cod: Any = field(default=None, compare=False)

    def __call__(self, A):
        if not isinstance(A, EventuallyConstant):
            raise InputError(f"the universal quantifier needs an eventually constant argument, got {A!r}")
        return all(A.prefix) and bool(A.tail)

    @property
    def name(self):
        return "forall"


# ---------------------------------------------------------------------------
# the function space as a PER space


class FnPer(PerSpace):
    """``[M -> N]`` on continuous described functions.

    ``f ~_(i,j) g`` holds when related arguments at ``i`` go to related
    values at ``j``; it is checked on the candidate arguments of ``M``
    (its grid points, capped at ``POINT_CAP``, plus its samples).  Points at
    ``(i, j)`` are step functions whose values are points of ``N``.
    """

    level = "perset"

    def __init__(self, M: PerSpace, N: PerSpace, bound: Index | None = None, name: str | None = None):
        if M.level != "perset" or N.level != "perset":
            raise InputError("both spaces need a total point map")
        index = ProductIndex((M.index, N.index))
        super().__init__(name or f"[{M.name} -> {N.name}]", index, ProductFilter(index, M.filter, N.filter))
        self.M, self.N = M, N
        if bound is None:
            bound = (_default_bound(M.index), _default_bound(N.index))
        self.bound = index.validate(bound)
        self._groups: dict = {}
        self._probe = None

    # relation ----------------------------------------------------------
    def arg_groups(self, i, extra: Sequence = ()):
        """Candidate arguments in the domain at ``i``, grouped by total class."""
        key = (i, tuple(map(self.M.key, extra)))
        hit = self._groups.get(key)
        if hit is None:
            M = self.M
            cands = _dedupe(M, list(M.candidates(i, self.bound[0])) + list(extra))
            groups: dict = {}
            for a in cands:
                if M.in_dom(a, i):
                    groups.setdefault(M.class_key(a, i), []).append(a)
            hit = self._groups[key] = list(groups.values())
        return hit

    def related(self, f, g, ij, extra: Sequence = ()):
        """The first ``(a, b)`` with ``a ~_i b`` but ``f(a)`` not related to ``g(b)``, or ``None``."""
        i, j = ij
        M, N = self.M, self.N
        for grp in self.arg_groups(i, extra):
            for a in grp:
                for b in grp:
                    if (a is b or M.per(a, b, i)) and not N.per(f(a), g(b), j):
                        return a, b
        return None

    def per(self, f, g, ij):
        return self.related(f, g, ij) is None

    # points ----------------------------------------------------------
    def count(self, ij) -> int:
        i, j = ij
        return self.N.count_points(j) ** self.M.count_points(i)

    count_points = count

    def _point(self, i, j, pts, vals):
        return self.M.step_fn(i, {self.M.key(p): v for p, v in zip(pts, vals)}, self.N)

    def points(self, ij):
        i, j = self.index.validate(ij)
        n = self.count(ij)
        if n > enumeration_cap():
            raise ResourceError(f"{n} step functions at {self.index.fmt(ij)} exceed the enumeration cap")
        pts, vals = self.M.points(i), self.N.points(j)
        return tuple(self._point(i, j, pts, v) for v in itertools.product(vals, repeat=len(pts)))

    def candidates(self, ij, bound):
        i, j = ij
        pts, vals = self.M.points(i), self.N.points(j)
        n = len(vals) ** len(pts)
        if n <= POINT_CAP:
            chosen = self.points(ij)
        else:
            rng = random.Random(0)
            chosen = []
            for code in sorted(rng.sample(range(n), POINT_CAP)):
                digits = []
                for _ in pts:
                    code, r = divmod(code, len(vals))
                    digits.append(vals[r])
                chosen.append(self._point(i, j, pts, digits))
        return _dedupe(self, list(chosen) + list(self.samples(bound)))

    def Pt(self, f, ij):
        i, j = ij
        return self.M.step_fn(i, {self.M.key(p): self.N.Pt(f(p), j) for p in self.M.points(i)}, self.N)

    def class_key(self, f, ij):
        i, j = ij
        return tuple(self.N.class_key(f(p), j) for p in self.M.points(i))

    # carrier ---------------------------------------------------------
    def probe(self) -> list:
        if self._probe is None:
            M = self.M
            reach = M.index.horizon(self.bound[0])
            pts = list(M.points(reach)) if M.count_points(reach) <= POINT_CAP else []
            self._probe = _dedupe(M, pts + list(M.samples(self.bound[0])))
        return self._probe

    def key(self, f):
        """Values on the probe set: equal for functions that agree wherever they are compared."""
        return tuple(self.N.key(f(x)) for x in self.probe())

    def name_of(self, f):
        return f.name

    def domain_desc(self, f):
        desc = witness_description(f, self.M, self.N)
        return desc if desc is not None else super().domain_desc(f)

    def samples(self, bound=None, n: int = 50):
        bound = self.bound if bound is None else self.index.validate(bound)
        M, N = self.M, self.N
        out = []
        if isinstance(M, NatPer):
            vals = list(N.samples(bound[1]))[:12]
            out += [EventuallyConstant((), v, dom=M, cod=N) for v in vals]
            if isinstance(N, NatPer):
                out += [named_fn("id", M, N), named_fn("succ", M, N)]
            if isinstance(N, BoolPer):
                top = 2 * bound[0] + 2
                out += [EventuallyConstant((True,) * k, False, dom=M, cod=N) for k in range(1, top + 1)]
                out += [EventuallyConstant((False,) * k, True, dom=M, cod=N) for k in range(1, 4)]
            rng = random.Random(5)
            while len(out) < n:
                out.append(EventuallyConstant(tuple(rng.choice(vals) for _ in range(rng.randint(0, 6))),
                                              rng.choice(vals), dom=M, cod=N))
        elif isinstance(M, BoolPer):
            vals = list(N.samples(bound[1]))[:8]
            out += [Table(((False, x), (True, y)), dom=M, cod=N) for x in vals for y in vals]
        else:
            for ij in self.index.upto(bound):
                if self.count(ij) <= 64:
                    out += list(self.points(ij))
        return _dedupe(self, out)[: max(n, len(out))]


def _default_bound(poset):
    """The only index of a trivial poset, else a small default."""
    return poset.least() if poset.upset(poset.least()) == [poset.least()] else 4


def fn_perspace(M: PerSpace, N: PerSpace, bound: Index | None = None) -> FnPer:
    return FnPer(M, N, bound)


def nat_bool_space(bound: Index | None = None) -> FnPer:
    """``[nat -> bool]``; its samples include the functions true exactly below ``k``."""
    return FnPer(NatPer(), BoolPer(), bound if bound is not None else (8, "*"))


def named_fn(name: str, M: PerSpace | None = None, N: PerSpace | None = None) -> DescribedFn:
    """``id``, ``succ``, ``const:<n>`` or ``forall``."""
    M = NatPer() if M is None else M
    N = NatPer() if N is None else N
    if name == "id":
        return Rule("id", lambda n: n, dom=M, cod=N)
    if name == "succ":
        return Rule("succ", lambda n: n + 1, dom=M, cod=N)
    if name.startswith("const:"):
        try:
            c = int(name.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad constant in {name!r}") from None
        if c < 0:
            raise InputError("constants must be natural numbers")
        return EventuallyConstant((), c, dom=M, cod=N)
    if name == "forall":
        return ForallFn(dom=nat_bool_space(), cod=BoolPer())
    raise InputError(f"unknown function {name!r}; use id, succ, const:<n> or forall")


def table_fn(entries: dict, M: PerSpace | None = None, N: PerSpace | None = None) -> EventuallyConstant:
    """An eventually constant ``nat -> nat`` function from ``{"0": v0, ..., "_": tail}``."""
    M = NatPer() if M is None else M
    N = NatPer() if N is None else N
    try:
        tail = int(entries.get("_", 0))
        pts = {int(k): int(v) for k, v in entries.items() if k != "_"}
    except (TypeError, ValueError):
        raise InputError("table entries must be natural numbers") from None
    if any(k < 0 or v < 0 for k, v in pts.items()) or tail < 0:
        raise InputError("table entries must be natural numbers")
    top = max(pts, default=-1) + 1
    return EventuallyConstant(tuple(pts.get(n, tail) for n in range(top)), tail, dom=M, cod=N)


# ---------------------------------------------------------------------------
# continuity


def per_fn(f: DescribedFn, g: DescribedFn, ij, bound=None, samples: Sequence = ()) -> bool:
    """``f ~_(i,j) g`` on the candidate arguments of the domain and ``samples``."""
    F = FnPer(f.dom, f.cod, bound)
    F.index.validate(ij)
    return F.related(f, g, ij, samples) is None


def is_ij_continuous(f: DescribedFn, i, j, bound=None, samples: Sequence = ()) -> bool:
    return per_fn(f, f, (i, j), bound, samples)


def witness_description(f: DescribedFn, M: PerSpace, N: PerSpace) -> SubsetDesc | None:
    """A symbolic description of the stages where ``f`` is continuous, when one is known.

    If every class of ``M`` is one grid point and each value's domain in
    ``N`` is a principal up-set, ``f`` is continuous at ``(i, j)`` exactly
    when ``j`` lies above the generator of every ``f(p)`` with ``p`` a point
    at ``i``.  The universal quantifier is continuous nowhere.
    """
    index = ProductIndex((M.index, N.index))
    if isinstance(f, ForallFn):
        return Finite(index, ())
    if not (M.singleton_classes and N.principal_domains):
        return None
    J = N.index

    def threshold(i):
        t = None
        for p in M.points(i):
            s = N.least_stage(f(p))
            t = s if t is None else J.join(t, s)
        return t

    return ThresholdGraph(index, threshold, label=f"I({f.name})")


@dataclass
class ContinuityReport:
    fn: str
    bound: Any
    grid: dict
    description: SubsetDesc | None
    cross_check: bool | None
    filter_verdict: bool | None
    mismatches: list = field(default_factory=list)

    @property
    def witnesses(self) -> list:
        return [ij for ij, ok in self.grid.items() if ok]

    def law_report(self, index) -> LawReport:
        rep = LawReport(f"continuity of {self.fn}", index.fmt(self.bound),
                        meta={"witnesses": [index.fmt(ij) for ij in self.witnesses],
                              "cells": len(self.grid),
                              "described-as": None if self.description is None else self.description.label,
                              "large": self.filter_verdict})
        if self.cross_check is None:
            rep.add("GRID", "the witness grid matches the described witness set", verdict=Verdict.UNKNOWN,
                    detail="no symbolic description of the witness set")
        else:
            rep.add("GRID", "the witness grid matches the described witness set",
                    None if self.cross_check else {"cells": [index.fmt(ij) for ij in self.mismatches[:8]]})
        verdict = {True: Verdict.PASS, False: Verdict.PASS, None: Verdict.UNKNOWN}[self.filter_verdict]
        rep.add("LARGE", "whether the witness set is large is decided", verdict=verdict,
                detail={True: "continuous", False: "not continuous", None: "undecided at this bound"}[self.filter_verdict])
        return rep


def continuity_report(f: DescribedFn, bound, samples: Sequence = ()) -> ContinuityReport:
    """Check every cell ``(i, j) <= bound`` and decide whether the witness set is large."""
    F = FnPer(f.dom, f.cod, bound)
    bound = F.bound
    grid = {ij: F.related(f, f, ij, samples) is None for ij in F.index.upto(bound)}
    desc = witness_description(f, f.dom, f.cod)
    cross, verdict, bad = None, None, []
    if desc is not None:
        bad = [ij for ij, ok in grid.items() if bool(desc.contains(ij)) != ok]
        cross = not bad
        if cross:
            verdict = filter_contains(F.filter, desc, bound)
    return ContinuityReport(f.name, bound, grid, desc, cross, verdict, bad)


def check_forall_counterexample(i: int) -> LawReport:
    """The pair for stage ``i`` is related at ``(i, *)`` yet separated by the quantifier."""
    from .gallery import forall_counterexample

    A, A2 = forall_counterexample(i)
    Q = named_fn("forall")
    rep = LawReport("universal quantifier", i)
    rel = per_fn(A, A2, (i, "*"), (max(i, 8), "*"))
    rep.add("RELATED", "the two functions are related at the stage", None if rel else
            {"A": A.name, "A'": A2.name, "stage": f"{i}->*"})
    vals = (Q(A), Q(A2))
    rep.add("SEPARATED", "the quantifier separates them", None if vals[0] != vals[1] else
            {"values": ["true" if v else "false" for v in vals]})
    return rep


# ---------------------------------------------------------------------------
# function-space points and the internal isomorphism


def eval_chain_check(f: DescribedFn, a, i, j, bound=None) -> LawReport:
    """``f(a) ~_j f(pt_i a) ~_j Pt(f)(a) = Pt(f)(pt_i a)`` at a continuity stage of ``f``."""
    F = FnPer(f.dom, f.cod, bound)
    M, N = F.M, F.N
    if not F.in_dom(f, (i, j)):
        raise InputError(f"{f.name} is not continuous at {F.index.fmt((i, j))}")
    if not M.in_dom(a, i):
        raise InputError(f"{M.name_of(a)} is not in the domain of the relation at {M.index.fmt(i)}")
    step = F.pt(f, (i, j))
    p = M.pt(a, i)
    terms = [f(a), f(p), step(a), step(p)]
    rep = LawReport(f"evaluation chain for {f.name} at {M.name_of(a)}", F.index.fmt((i, j)),
                    meta={"terms": [N.name_of(t) for t in terms]})
    rep.add("CHAIN1", "the value is related to the value at the grid point",
            None if N.per(terms[0], terms[1], j) else {"terms": [N.name_of(t) for t in terms[:2]]})
    rep.add("CHAIN2", "the value at the grid point is related to the step function's value",
            None if N.per(terms[1], terms[2], j) else {"terms": [N.name_of(t) for t in terms[1:3]]})
    rep.add("CHAIN3", "the step function gives the same value at the element and at its grid point",
            None if N.key(terms[2]) == N.key(terms[3]) else {"terms": [N.name_of(t) for t in terms[2:]]})
    return rep


def check_pt_laws(F: FnPer, ij, fns: Sequence, args: Sequence) -> LawReport:
    """For each continuous ``f`` at ``ij``: ``Pt(f)`` is a point, ``Pt`` is idempotent, and the chain holds."""
    i, j = ij
    rep = LawReport(f"point map of {F.name}", F.index.fmt(ij), meta={"functions": len(fns), "arguments": len(args)})
    points = {F.key(q) for q in F.points(ij)}
    in_points = idem = chain = None
    checked = 0
    for f in fns:
        if not F.in_dom(f, ij):
            continue
        checked += 1
        q = F.Pt(f, ij)
        if in_points is None and F.key(q) not in points:
            in_points = {"f": f.name, "Pt": q.name}
        if idem is None and F.key(F.Pt(q, ij)) != F.key(q):
            idem = {"f": f.name, "Pt": q.name, "Pt(Pt)": F.Pt(q, ij).name}
        if chain is None:
            for a in args:
                if F.M.in_dom(a, i):
                    sub = eval_chain_check(f, a, i, j, F.bound)
                    if not sub.ok:
                        chain = {"f": f.name, "a": F.M.name_of(a), "failed": [r.law for r in sub.failures]}
                        break
    rep.meta["continuous-functions"] = checked
    rep.add("PTPOINT", "the point map lands in the step functions", in_points)
    rep.add("PTIDEM", "the point map is idempotent", idem)
    rep.add("PTCHAIN", "the evaluation chain holds at every argument", chain)
    return rep


def check_apx_iso(M: PerSpace, N: PerSpace, bound) -> LawReport:
    """Compare the internal system of ``[M -> N]`` with the function space of the internal systems.

    The map sends a table ``t`` at ``(i, j)`` to the step function that is
    ``t(p)`` on the class of each point ``p``.  It is checked to be a strong,
    bijective homomorphism commuting with embeddings and projections.
    """
    F = FnPer(M, N, bound)
    bound = F.bound
    A = internal_system(F, bound, "perset")
    B = function_space(internal_system(M, bound[0], "perset"), internal_system(N, bound[1], "perset"))
    by_key: dict = {}

    def image(ij, t):
        i, j = ij
        stage = by_key.get(ij)
        if stage is None:
            stage = by_key[ij] = {F.key(q): q for q in A.stage(ij)}
        q = M.step_fn(i, {M.key(p): t(p) for p in M.points(i)}, N)
        return stage.get(F.key(q), q)

    hom = SystemHom(lambda ij: ij, image, name="tables to step functions", strong=True, emb=True,
                    proj=True, injective=True, surjective=True)
    rep = check_hom(hom, B, A, bound)
    rep.structure = f"{B.name} vs {A.name}"
    cards = {}
    bad = None
    for ij in F.index.upto(bound):
        a, b = len(A.stage(ij)), len(B.stage(ij))
        cards[F.index.fmt(ij)] = [b, a]
        if a != b and bad is None:
            bad = {"stage": F.index.fmt(ij), "tables": b, "step-functions": a}
    rep.add("CARD", "both sides have the same number of states at every stage", bad)
    top = bound
    rep.meta["cardinalities"] = cards
    rep.meta["certificate"] = [[B.state_name(t), F.name_of(image(top, t))] for t in B.stage(top)[:16]]
    return rep
