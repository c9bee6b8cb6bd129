"""Directed index sets and filters of large index sets over them.

Index values are plain Python values: ``int`` for the numeric posets, ``"*"``
for the one-point poset and tuples for products.  A pair ``(i, j)`` in a
product is written ``i->j`` when printed.

Subsets of an index set are described intensionally (:class:`SubsetDesc`).
Membership answers are three-valued: ``True``, ``False`` or ``None``, the
last one meaning *unknown at bound*.  Filters never turn ``None`` into
``False``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

from .errors import InputError
from .report import LawReport, Verdict

Index = Hashable
STAR = "*"


# three-valued connectives, None = unknown
def and3(a: bool | None, b: bool | None) -> bool | None:
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def or3(a: bool | None, b: bool | None) -> bool | None:
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


class IndexPoset:
    """A non-empty directed preorder, enumerable below any index."""

    kind = "abstract"

    def validate(self, i: Index) -> Index:
        raise NotImplementedError

    def leq(self, i: Index, j: Index) -> bool:
        raise NotImplementedError

    def join(self, i: Index, j: Index) -> Index:
        raise NotImplementedError

    def upto(self, bound: Index) -> list[Index]:
        """All indices ``<= bound``, smaller ones first."""
        raise NotImplementedError

    def succ(self, i: Index) -> Index:
        """One step up; saturates at a top index."""
        raise NotImplementedError

    def horizon(self, bound: Index) -> Index:
        """Resolution used when a claim about an infinite tail is checked at ``bound``."""
        raise NotImplementedError

    def least(self) -> Index:
        raise NotImplementedError

    def upset(self, i: Index) -> list[Index] | None:
        """The up-set of ``i`` when it is finite, else ``None``."""
        raise NotImplementedError

    def above(self, i: Index, limit: Index) -> list[Index]:
        return [k for k in self.upto(limit) if self.leq(i, k)]

    def fmt(self, i: Index) -> str:
        return str(i)

    def parse(self, text: str) -> Index:
        raise NotImplementedError


@dataclass(frozen=True)
class NatIndex(IndexPoset):
    """``{start, start+1, ...}`` optionally capped at ``top``."""

    start: int = 1
    top: int | None = None

    @property
    def kind(self) -> str:
        return "natplus" if self.start == 1 else "nat"

    def validate(self, i):
        if isinstance(i, bool) or not isinstance(i, int) or i < self.start or (self.top is not None and i > self.top):
            raise InputError(f"index {i!r} outside {self.kind}" + (f" (top {self.top})" if self.top is not None else ""))
        return i

    def leq(self, i, j):
        return self.validate(i) <= self.validate(j)

    def join(self, i, j):
        return max(self.validate(i), self.validate(j))

    def upto(self, bound):
        return list(range(self.start, self.validate(bound) + 1))

    def succ(self, i):
        i = self.validate(i)
        return i if self.top is not None and i >= self.top else i + 1

    def horizon(self, bound):
        h = 2 * self.validate(bound) + 2
        return h if self.top is None else min(h, self.top)

    def least(self):
        return self.start

    def upset(self, i):
        i = self.validate(i)
        return None if self.top is None else list(range(i, self.top + 1))

    def parse(self, text):
        try:
            return self.validate(int(text))
        except ValueError:
            raise InputError(f"not an index of {self.kind}: {text!r}") from None


@dataclass(frozen=True)
class TrivialIndex(IndexPoset):
    """The one-point index set ``{*}``."""

    kind = "trivial"

    def validate(self, i):
        if i != STAR:
            raise InputError(f"index {i!r} outside trivial index {{*}}")
        return i

    def leq(self, i, j):
        self.validate(i), self.validate(j)
        return True

    def join(self, i, j):
        self.validate(i), self.validate(j)
        return STAR

    def upto(self, bound):
        self.validate(bound)
        return [STAR]

    def succ(self, i):
        return self.validate(i)

    def horizon(self, bound):
        return self.validate(bound)

    def least(self):
        return STAR

    def upset(self, i):
        return [self.validate(i)]

    def parse(self, text):
        return self.validate(text.strip())


@dataclass(frozen=True)
class ProductIndex(IndexPoset):
    """Finite product with the componentwise order."""

    factors: tuple[IndexPoset, ...]

    kind = "product"

    def __post_init__(self):
        if len(self.factors) < 1:
            raise InputError("product index needs at least one factor")

    def validate(self, i):
        if not isinstance(i, tuple) or len(i) != len(self.factors):
            raise InputError(f"index {i!r} is not a {len(self.factors)}-tuple")
        for f, c in zip(self.factors, i):
            f.validate(c)
        return i

    def leq(self, i, j):
        self.validate(i), self.validate(j)
        return all(f.leq(a, b) for f, a, b in zip(self.factors, i, j))

    def join(self, i, j):
        self.validate(i), self.validate(j)
        return tuple(f.join(a, b) for f, a, b in zip(self.factors, i, j))

    def upto(self, bound):
        self.validate(bound)
        cells = list(itertools.product(*(f.upto(b) for f, b in zip(self.factors, bound))))
        rank = [{c: n for n, c in enumerate(f.upto(b))} for f, b in zip(self.factors, bound)]
        return sorted(cells, key=lambda t: (sum(r[c] for r, c in zip(rank, t)), [r[c] for r, c in zip(rank, t)]))

    def succ(self, i):
        self.validate(i)
        return tuple(f.succ(c) for f, c in zip(self.factors, i))

    def horizon(self, bound):
        self.validate(bound)
        return tuple(f.horizon(c) for f, c in zip(self.factors, bound))

    def least(self):
        return tuple(f.least() for f in self.factors)

    def upset(self, i):
        self.validate(i)
        parts = [f.upset(c) for f, c in zip(self.factors, i)]
        if any(p is None for p in parts):
            return None
        return list(itertools.product(*parts))

    def fmt(self, i):
        return "->".join(f.fmt(c) for f, c in zip(self.factors, i))

    def parse(self, text):
        parts = text.replace("→", "->").split("->")
        if len(parts) != len(self.factors):
            raise InputError(f"expected {len(self.factors)} components in {text!r}")
        return tuple(f.parse(p) for f, p in zip(self.factors, parts))


# ---------------------------------------------------------------------------
# subset descriptions


class SubsetDesc:
    """An intensional description of a subset of ``poset``."""

    poset: IndexPoset
    label: str = "?"

    def contains(self, i: Index) -> bool | None:
        raise NotImplementedError

    def upset_inside(self, i: Index, horizon: Index) -> bool | None:
        """Is the up-set of ``i`` contained in this set?

        Exact for structural descriptions; predicates are inspected on the
        window ``[i, horizon]``.
        """
        return _window_all(self, i, horizon)

    def upset_large(self) -> bool | None:
        """Exact answer to "contains some up-set", or ``None`` when only a window search can tell."""
        return None

    def section(self, i: Index) -> "SubsetDesc":
        """``{j | (i, j) in self}`` for a set of pairs."""
        poset = _pair_poset(self.poset)
        return Predicate(poset.factors[1], lambda j: self.contains((i, j)), label=f"{self.label}[{i}]")

    def materialize(self, bound: Index) -> list[Index]:
        out = []
        for i in self.poset.upto(bound):
            r = self.contains(i)
            if r is None:
                raise InputError(f"membership of {self.poset.fmt(i)} in {self.label} is unknown")
            if r:
                out.append(i)
        return out

    def __and__(self, other: "SubsetDesc") -> "SubsetDesc":
        return Intersection(self, other)

    def __or__(self, other: "SubsetDesc") -> "SubsetDesc":
        return Union(self, other)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


def _pair_poset(p: IndexPoset) -> ProductIndex:
    if not isinstance(p, ProductIndex) or len(p.factors) != 2:
        raise InputError("sections are only defined for subsets of a binary product")
    return p


def _window_all(desc: SubsetDesc, i: Index, horizon: Index) -> bool | None:
    p = desc.poset
    if not p.leq(i, horizon):
        horizon = p.join(i, horizon)
    finite = p.upset(i)
    window = finite if finite is not None else p.above(i, horizon)
    result: bool | None = True
    for k in window:
        result = and3(result, desc.contains(k))
        if result is False:
            return False
    return result


@dataclass(frozen=True, repr=False)
class Upset(SubsetDesc):
    """The union of the up-sets of finitely many generators."""

    poset: IndexPoset
    generators: tuple

    def __post_init__(self):
        for g in self.generators:
            self.poset.validate(g)

    @property
    def label(self):
        return "up{" + ",".join(self.poset.fmt(g) for g in self.generators) + "}"

    def contains(self, i):
        return any(self.poset.leq(g, i) for g in self.generators)

    def upset_inside(self, i, horizon):
        return self.contains(i)

    def upset_large(self):
        return bool(self.generators)

    def section(self, i):
        p = _pair_poset(self.poset)
        gens = tuple(g[1] for g in self.generators if p.factors[0].leq(g[0], i))
        return Upset(p.factors[1], gens) if gens else Finite(p.factors[1], ())


def up(poset: IndexPoset, *gens) -> Upset:
    return Upset(poset, tuple(gens))


@dataclass(frozen=True, repr=False)
class Finite(SubsetDesc):
    poset: IndexPoset
    members: tuple

    def __post_init__(self):
        for m in self.members:
            self.poset.validate(m)

    @property
    def label(self):
        return "{" + ",".join(self.poset.fmt(m) for m in self.members) + "}"

    def contains(self, i):
        self.poset.validate(i)
        return i in self.members

    def upset_inside(self, i, horizon):
        ups = self.poset.upset(i)
        return ups is not None and all(k in self.members for k in ups)

    def upset_large(self):
        return any(self.upset_inside(m, m) for m in self.members)

    def section(self, i):
        p = _pair_poset(self.poset)
        return Finite(p.factors[1], tuple(m[1] for m in self.members if m[0] == i))


def empty(poset: IndexPoset) -> Finite:
    return Finite(poset, ())


@dataclass(frozen=True, repr=False)
class Predicate(SubsetDesc):
    """A decidable predicate, optionally only decidable up to ``limit``.

    ``upward=True`` declares the set upward closed, which makes up-set
    containment exact.
    """

    poset: IndexPoset
    fn: Callable[[Index], bool | None] = field(compare=False)
    limit: Index | None = None
    upward: bool = False
    label: str = "pred"

    def contains(self, i):
        self.poset.validate(i)
        if self.limit is not None and not self.poset.leq(i, self.limit):
            return None
        r = self.fn(i)
        return None if r is None else bool(r)

    def upset_inside(self, i, horizon):
        if self.upward:
            return self.contains(i)
        return _window_all(self, i, horizon)

    def section(self, i):
        p = _pair_poset(self.poset)
        lim = None if self.limit is None else self.limit[1]
        if self.limit is not None and not p.factors[0].leq(i, self.limit[0]):
            return Predicate(p.factors[1], lambda j: None, label=f"{self.label}[{i}]")
        return Predicate(p.factors[1], lambda j: self.fn((i, j)), limit=lim, upward=self.upward,
                         label=f"{self.label}[{i}]")


@dataclass(frozen=True, repr=False)
class ThresholdGraph(SubsetDesc):
    """``{(i, j) | j >= threshold(i)}`` on a binary product.

    ``threshold(i) is None`` means the section at ``i`` is empty.
    """

    poset: ProductIndex
    threshold: Callable[[Index], Index | None] = field(compare=False)
    label: str = "graph"

    def contains(self, ij):
        self.poset.validate(ij)
        t = self.threshold(ij[0])
        return t is not None and self.poset.factors[1].leq(t, ij[1])

    def section(self, i):
        J = self.poset.factors[1]
        t = self.threshold(i)
        return Finite(J, ()) if t is None else Upset(J, (t,))


@dataclass(frozen=True, repr=False)
class Intersection(SubsetDesc):
    left: SubsetDesc
    right: SubsetDesc

    @property
    def poset(self):
        return self.left.poset

    @property
    def label(self):
        return f"({self.left.label} & {self.right.label})"

    def contains(self, i):
        return and3(self.left.contains(i), self.right.contains(i))

    def upset_inside(self, i, horizon):
        return and3(self.left.upset_inside(i, horizon), self.right.upset_inside(i, horizon))

    def upset_large(self):
        # directedness: up(a) & up(b) contains up(join(a, b))
        a, b = self.left.upset_large(), self.right.upset_large()
        if a is False or b is False:
            return False
        return True if a and b else None

    def section(self, i):
        return Intersection(self.left.section(i), self.right.section(i))


@dataclass(frozen=True, repr=False)
class Union(SubsetDesc):
    left: SubsetDesc
    right: SubsetDesc

    @property
    def poset(self):
        return self.left.poset

    @property
    def label(self):
        return f"({self.left.label} | {self.right.label})"

    def contains(self, i):
        return or3(self.left.contains(i), self.right.contains(i))

    def upset_inside(self, i, horizon):
        if self.left.upset_inside(i, horizon) is True or self.right.upset_inside(i, horizon) is True:
            return True
        return _window_all(self, i, horizon)

    def upset_large(self):
        a, b = self.left.upset_large(), self.right.upset_large()
        return True if (a or b) else None

    def section(self, i):
        return Union(self.left.section(i), self.right.section(i))


def image_on(H: SubsetDesc, Iprime: SubsetDesc, bound: Index) -> Predicate:
    """``H[I'] = {j | exists i in I' with i->j in H}``.

    The existential ranges over ``i`` up to the horizon of the first
    component of ``bound``.
    """
    p = _pair_poset(H.poset)
    I, J = p.factors
    p.validate(bound)
    candidates = I.upto(I.horizon(bound[0]))

    @functools.lru_cache(maxsize=None)
    def member(j):
        seen_unknown = False
        for i in candidates:
            r = and3(Iprime.contains(i), H.contains((i, j)))
            if r:
                return True
            seen_unknown |= r is None
        return None if seen_unknown else False

    return Predicate(J, member, label=f"{H.label}[{Iprime.label}]")


# ---------------------------------------------------------------------------
# filters


class FilterSpec:
    poset: IndexPoset
    kind = "abstract"

    def contains(self, H: SubsetDesc, bound: Index) -> bool | None:
        raise NotImplementedError


@dataclass(frozen=True)
class UpsetFilter(FilterSpec):
    """Sets containing the up-set of some index."""

    poset: IndexPoset
    kind = "upset"

    def contains(self, H, bound):
        exact = H.upset_large()
        if exact is not None:
            return exact
        horizon = self.poset.horizon(bound)
        unknown = False
        for i in self.poset.upto(bound):
            r = H.upset_inside(i, horizon)
            if r:
                return True
            unknown |= r is None
        return None if unknown else False


@dataclass(frozen=True)
class ProductFilter(FilterSpec):
    """``H`` is large iff the set of ``i`` whose section ``H_i`` is large is large."""

    poset: ProductIndex
    outer: FilterSpec
    inner: FilterSpec
    kind = "product"

    def __post_init__(self):
        _pair_poset(self.poset)

    def contains(self, H, bound):
        self.poset.validate(bound)
        b_outer, b_inner = bound

        @functools.lru_cache(maxsize=None)
        def big_section(i):
            return self.inner.contains(H.section(i), b_inner)

        S = Predicate(self.poset.factors[0], big_section, label=f"big-sections({H.label})")
        return self.outer.contains(S, b_outer)


def default_filter(poset: IndexPoset) -> FilterSpec:
    if isinstance(poset, ProductIndex) and len(poset.factors) == 2:
        return ProductFilter(poset, default_filter(poset.factors[0]), default_filter(poset.factors[1]))
    return UpsetFilter(poset)


def filter_contains(F: FilterSpec, H: SubsetDesc, bound: Index) -> bool | None:
    return F.contains(H, bound)


def is_cofinal(H: SubsetDesc, bound: Index) -> bool | None:
    """Every index up to ``bound`` has a member of ``H`` above it, within the horizon."""
    p = H.poset
    horizon = p.horizon(bound)
    verdict: bool | None = True
    for j in p.upto(bound):
        hit: bool | None = False
        for k in p.above(j, horizon):
            hit = or3(hit, H.contains(k))
            if hit:
                break
        verdict = and3(verdict, hit)
        if verdict is False:
            return False
    return verdict


# ---------------------------------------------------------------------------
# law checks


LAW_ANCHORS = {
    "PROPER": "the empty set is not large",
    "UPSETS": "every up-set of an index is large",
    "COFIN": "every large set is cofinal",
    "UPCLOSED": "supersets of large sets are large",
    "MEET": "intersections of two large sets are large",
    "D": "a large set of pairs applied to a large set of arguments has a large image",
}


def _verdict_entry(report, law, r, counterexample):
    if r is True:
        report.add(law, LAW_ANCHORS[law])
    elif r is None:
        report.add(law, LAW_ANCHORS[law], verdict=Verdict.UNKNOWN, detail=str(counterexample))
    else:
        report.add(law, LAW_ANCHORS[law], counterexample)


def check_filter_laws(F: FilterSpec, bound: Index, samples: Sequence[SubsetDesc],
                      outer_samples: Sequence[SubsetDesc] | None = None) -> LawReport:
    """Check the filter laws on ``samples`` (and condition D for product filters).

    Unknown membership of a sample makes the law ``unknown-at-bound`` unless
    some other sample already refutes it.
    """
    p = F.poset
    rep = LawReport(f"filter[{F.kind}] over {p.kind}", bound,
                    meta={"samples": len(samples), "horizon": p.fmt(p.horizon(bound))})

    r = F.contains(empty(p), bound)
    _verdict_entry(rep, "PROPER", None if r is None else not r, {"set": "{}"})

    state, cex = True, None
    for i in p.upto(bound):
        r = F.contains(up(p, i), bound)
        if r is not True:
            state, cex = (False if r is False else None), {"index": p.fmt(i)}
            if r is False:
                break
    _verdict_entry(rep, "UPSETS", state, cex)

    members = [(H, F.contains(H, bound)) for H in samples]
    large = [H for H, r in members if r is True]

    state, cex = True, None
    for H in large:
        r = is_cofinal(H, bound)
        if r is not True:
            state, cex = and3(state, r), {"set": H.label}
            if r is False:
                break
    _verdict_entry(rep, "COFIN", state, cex)

    state, cex = True, None
    for H in large:
        for K in samples:
            r = F.contains(H | K, bound)
            if r is not True:
                state, cex = and3(state, r), {"large": H.label, "superset": (H | K).label}
        if state is False:
            break
    _verdict_entry(rep, "UPCLOSED", state, cex)

    state, cex = True, None
    for H, K in itertools.combinations_with_replacement(large, 2):
        r = F.contains(H & K, bound)
        if r is not True:
            state, cex = and3(state, r), {"left": H.label, "right": K.label}
            if r is False:
                break
    _verdict_entry(rep, "MEET", state, cex)

    if isinstance(F, ProductFilter):
        outer = outer_samples if outer_samples is not None else [up(p.factors[0], i) for i in p.factors[0].upto(bound[0])]
        big_outer = [I for I in outer if F.outer.contains(I, bound[0]) is True]
        state, cex = True, None
        for H in large:
            for Ip in big_outer:
                r = F.inner.contains(image_on(H, Ip, bound), bound[1])
                if r is not True:
                    state, cex = and3(state, r), {"pairs": H.label, "arguments": Ip.label}
                    if r is False:
                        break
            if state is False:
                break
        _verdict_entry(rep, "D", state, cex)
        rep.meta["D-arguments"] = len(big_outer)
    rep.meta["large-samples"] = len(large)
    return rep


def sample_subsets(poset: IndexPoset, bound: Index, n: int = 20) -> list[SubsetDesc]:
    """A deterministic mix of structural and predicate-described subsets."""
    out: list[SubsetDesc] = []
    if isinstance(poset, NatIndex):
        idx = poset.upto(bound)
        for k in range(n):
            kind = k % 5
            a = idx[k % len(idx)]
            if kind == 0:
                out.append(up(poset, a))
            elif kind == 1:
                m = 2 + k % 3
                out.append(Predicate(poset, lambda i, m=m: i % m == 0, label=f"mult{m}"))
            elif kind == 2:
                out.append(Predicate(poset, lambda i, a=a: i >= a and i != a + 1, label=f"ge{a}-minus-{a + 1}"))
            elif kind == 3:
                out.append(Finite(poset, tuple(idx[: 1 + k % len(idx)])))
            else:
                out.append(Predicate(poset, lambda i, a=a: i >= a, upward=True, label=f"ge{a}"))
    elif isinstance(poset, ProductIndex) and len(poset.factors) == 2:
        I, J = poset.factors
        bi, bj = bound
        for k in range(n):
            kind = k % 5
            a = I.upto(bi)[k % len(I.upto(bi))]
            b = J.upto(bj)[k % len(J.upto(bj))]
            if kind == 0:
                out.append(ThresholdGraph(poset, lambda i: i, label="j>=i") if isinstance(J, NatIndex)
                           and isinstance(I, NatIndex) else up(poset, (a, b)))
            elif kind == 1:
                out.append(up(poset, (a, b)))
            elif kind == 2 and isinstance(J, NatIndex):
                c = k
                out.append(ThresholdGraph(poset, lambda i, c=c: max(J.start, c % 3 + 1), label=f"j>={c % 3 + 1}"))
            elif kind == 3 and isinstance(J, NatIndex):
                out.append(Predicate(poset, lambda ij: ij[1] % 2 == 0, label="j-even"))
            else:
                out.append(Finite(poset, tuple(poset.upto((a, b)))))
    else:
        out.append(up(poset, poset.least()))
        out.append(empty(poset))
    return out
