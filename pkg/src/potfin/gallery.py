"""Concrete models: natural numbers, booleans, dyadic intervals and bit streams.

Dyadic stage ``i`` holds the ``2**i`` half-open intervals ``[n/2^i, (n+1)/2^i)``.
Limit points are bit streams that are eventually periodic, so rationals such
as 1/3 are exact.  Two streams naming the same real (``0.0111...`` and
``0.1``) are kept distinct.
"""
from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .index import NatIndex, TrivialIndex
from .report import LawReport
from .system import RuleSystem, SystemHom

DEPTH_CAP = 16


def nat_system(bound: int = 8) -> RuleSystem:
    """``N_i = {0..i-1}``; ``n |> n``; inclusion up, ``min(n, i-1)`` down."""
    if bound < 1:
        raise InputError("nat system needs a bound >= 1")
    return RuleSystem(
        "nat", NatIndex(1),
        stage=lambda i: range(i),
        pmap=lambda i2, a2, i, a: a2 == a and a < i,
        emb=lambda i, i2, a: a,
        proj=lambda i2, i, a: min(a, i - 1),
        max_stage=bound, standard=True)


def bool_system() -> RuleSystem:
    return RuleSystem(
        "bool", TrivialIndex(),
        stage=lambda i: (False, True),
        pmap=lambda i2, a2, i, a: a2 == a,
        emb=lambda i, i2, a: a,
        proj=lambda i2, i, a: a,
        state_name=lambda b: "true" if b else "false",
        max_stage="*", standard=True)


def parity_system(bound: int = 8) -> RuleSystem:
    """Two states at every stage, related by equality; target of the collapse map."""
    return RuleSystem(
        "parity", NatIndex(1),
        stage=lambda i: (0, 1),
        pmap=lambda i2, a2, i, a: a2 == a,
        emb=lambda i, i2, a: a,
        proj=lambda i2, i, a: a,
        max_stage=bound, standard=True)


def collapse_hom() -> SystemHom:
    """``n@i -> (n + i) mod 2``: forgets the order and breaks refinement."""
    return SystemHom(lambda i: i, lambda i, n: (n + i) % 2, name="collapse")


@dataclass(frozen=True, order=True)
class DyadicState:
    i: int
    n: int

    def __post_init__(self):
        if self.i < 0 or not 0 <= self.n < 2 ** self.i:
            raise InputError(f"no dyadic interval number {self.n} at depth {self.i}")

    @property
    def left(self) -> Fraction:
        return Fraction(self.n, 2 ** self.i)

    def __str__(self):
        return f"[{self.left},{Fraction(self.n + 1, 2 ** self.i)})"


def dyadic_system(bound: int = 6, depth_cap: int = DEPTH_CAP) -> RuleSystem:
    """Nested dyadic intervals; embeddings keep the left endpoint."""
    if not 0 <= bound <= depth_cap:
        raise InputError(f"dyadic depth {bound} outside 0..{depth_cap}")

    def pmap(i2, a2, i, a):
        return (a2.n >> (i2 - i)) == a.n

    return RuleSystem(
        "dyadic", NatIndex(0, top=depth_cap),
        stage=lambda i: tuple(DyadicState(i, n) for n in range(2 ** i)),
        pmap=pmap,
        emb=lambda i, i2, a: DyadicState(i2, a.n << (i2 - i)),
        proj=lambda i2, i, a: DyadicState(i, a.n >> (i2 - i)),
        state_name=str, max_stage=bound, standard=True)


@dataclass(frozen=True)
class DyadicPoint:
    """The bit stream ``prefix`` followed by ``cycle`` repeated forever."""

    prefix: tuple = ()
    cycle: tuple = (0,)

    def __post_init__(self):
        if not self.cycle:
            raise InputError("a dyadic point needs a non-empty cycle")
        if any(b not in (0, 1) for b in self.prefix + self.cycle):
            raise InputError("dyadic bits must be 0 or 1")
        cyc = tuple(self.cycle)
        for p in range(1, len(cyc) + 1):
            if len(cyc) % p == 0 and cyc == cyc[:p] * (len(cyc) // p):
                cyc = cyc[:p]
                break
        pre = tuple(self.prefix)
        while pre and pre[-1] == cyc[-1]:
            cyc = (pre[-1],) + cyc[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "prefix", pre)
        object.__setattr__(self, "cycle", cyc)

    @classmethod
    def from_fraction(cls, q) -> "DyadicPoint":
        q = Fraction(q)
        if not 0 <= q < 1:
            raise InputError(f"{q} is outside [0, 1)")
        num, den = q.numerator, q.denominator
        bits, seen = [], {}
        while num not in seen:
            seen[num] = len(bits)
            num *= 2
            bits.append(num // den)
            num %= den
        k = seen[num]
        return cls(tuple(bits[:k]), tuple(bits[k:]))

    @classmethod
    def grid(cls, i: int, n: int) -> "DyadicPoint":
        """The left endpoint ``n / 2^i`` with a zero tail."""
        DyadicState(i, n)
        return cls(tuple((n >> (i - 1 - k)) & 1 for k in range(i)), (0,))

    @functools.lru_cache(maxsize=4096)
    def bits(self, k: int) -> tuple:
        out = list(self.prefix[:k])
        while len(out) < k:
            out.extend(self.cycle)
        return tuple(out[:k])

    def head(self, i: int) -> int:
        """The interval number at depth ``i``."""
        n = 0
        for b in self.bits(i):
            n = 2 * n + b
        return n

    def truncate(self, i: int) -> "DyadicPoint":
        """The partial sum of the first ``i`` bits."""
        return DyadicPoint(self.bits(i), (0,))

    @property
    def is_finite(self) -> bool:
        return self.cycle == (0,)

    def value(self) -> Fraction:
        L, C = len(self.prefix), len(self.cycle)
        pre = sum(Fraction(b, 2 ** (k + 1)) for k, b in enumerate(self.prefix))
        cyc = Fraction(int("".join(map(str, self.cycle)), 2), 2 ** C - 1)
        return pre + cyc / 2 ** L

    def __str__(self):
        pre = "".join(map(str, self.prefix))
        if self.cycle == (0,):
            return "0." + (pre or "0")
        return f"0.{pre}({''.join(map(str, self.cycle))})"


def dyadic_samples(n: int = 20, seed: int = 7, max_den: int = 97) -> list[DyadicPoint]:
    """``n`` distinct rationals in [0, 1), including 1/3 and a few dyadic ones."""
    rng = random.Random(seed)
    out = [Fraction(1, 3), Fraction(0), Fraction(1, 2), Fraction(5, 7)]
    while len(out) < n:
        d = rng.randint(2, max_den)
        q = Fraction(rng.randrange(d), d)
        if q not in out:
            out.append(q)
    return [DyadicPoint.from_fraction(q) for q in out[:n]]


def dyadic_emb(i: int, a: DyadicState) -> DyadicPoint:
    """Map an interval to its left endpoint."""
    return DyadicPoint.grid(i, a.n)


def dyadic_proj(i: int, p: DyadicPoint) -> DyadicState:
    """The depth-``i`` interval containing the stream."""
    return DyadicState(i, p.head(i))


def check_dyadic_ep(samples: list[DyadicPoint] | None = None, depth: int = 10) -> LawReport:
    """``Proj_i . Emb_i = id`` on every interval and ``Emb_i . Proj_i = pt_i`` on samples."""
    samples = dyadic_samples() if samples is None else samples
    rep = LawReport("dyadic limit maps", depth, meta={"samples": len(samples)})
    cex = None
    for i in range(depth + 1):
        for n in range(2 ** i):
            a = DyadicState(i, n)
            back = dyadic_proj(i, dyadic_emb(i, a))
            if back != a:
                cex = {"interval": str(a), "depth": i, "returned": str(back)}
                break
        if cex:
            break
    rep.add("DYEP1", "projecting the left endpoint of an interval returns the interval", cex)
    cex = None
    for p in samples:
        for i in range(depth + 1):
            lhs, rhs = dyadic_emb(i, dyadic_proj(i, p)), p.truncate(i)
            if lhs != rhs:
                cex = {"point": str(p), "depth": i, "emb-proj": str(lhs), "partial-sum": str(rhs)}
                break
        if cex:
            break
    rep.add("DYEP2", "the left endpoint of the enclosing interval is the partial sum", cex)
    return rep


def forall_counterexample(i: int):
    """``(A, A')``: constantly true, and true exactly below ``i``."""
    from .funspace import EventuallyConstant, nat_bool_space

    if i < 1:
        raise InputError("the counterexample needs i >= 1")
    space = nat_bool_space()
    return (EventuallyConstant((), True, dom=space.M, cod=space.N),
            EventuallyConstant((True,) * i, False, dom=space.M, cod=space.N))


def numeral(system: RuleSystem, n: int):
    """The dynamic element of ``n`` in the nat system: ``n`` at every stage above ``n``."""
    from .index import up
    from .limit import ConsistentFamily

    if n < 0:
        raise InputError("numerals are natural numbers")
    return ConsistentFamily.single(system, lambda i: n, up(system.index, n + 1), label=f"numeral {n}")


def shift_family(space, k: int = 0, name: str | None = None):
    """``n -> n + k`` tabulated at every ``i -> j`` with ``j >= i + k``.

    ``k = 0`` gives the approximations of the identity; ``k = 1`` those of
    the successor.  Truncation at ``j - 1`` never bites on this domain.
    """
    from .index import ThresholdGraph
    from .limit import ConsistentFamily

    if k < 0:
        raise InputError("the shift must be a natural number")
    dom = ThresholdGraph(space.index, lambda i: i + k, label=f"j>=i+{k}")
    return ConsistentFamily.single(space, lambda ij: space.table(ij, lambda a: a + k), dom,
                                   label=name or ("id" if k == 0 else f"shift{k}"))


BUILTIN_SYSTEMS = {"nat": nat_system, "dyadic": dyadic_system, "bool": lambda bound=None: bool_system(),
                   "parity": parity_system}


def builtin_system(name: str, bound=None):
    try:
        make = BUILTIN_SYSTEMS[name]
    except KeyError:
        raise InputError(f"unknown builtin system {name!r}; choose from {', '.join(sorted(BUILTIN_SYSTEMS))}") from None
    return make() if bound is None else make(bound)
