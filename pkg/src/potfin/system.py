"""Stage systems, factor systems, their law suite, function spaces and homomorphisms.

A stage system assigns a finite tuple of hashable states to every index and
decides ``a' |> a`` between a state at ``i'`` and one at ``i <= i'``.  All law
checks work on boolean relation matrices indexed by stage positions.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import InputError, ResourceError
from .index import (FilterSpec, Index, IndexPoset, NatIndex, ProductFilter, ProductIndex,
                    TrivialIndex, default_filter)
from .report import LawReport, Verdict

State = Hashable
DEFAULT_CAP = 10**6


def enumeration_cap() -> int:
    raw = os.environ.get("POTFIN_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"POTFIN_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InputError("POTFIN_CAP must be positive")
    return cap


def cap_index(poset: IndexPoset, i: Index, bound: Index) -> Index:
    """The largest index below both ``i`` and ``bound`` for the shipped posets."""
    if poset.leq(i, bound):
        return i
    if isinstance(poset, NatIndex):
        return min(i, bound)
    if isinstance(poset, ProductIndex):
        return tuple(cap_index(f, a, b) for f, a, b in zip(poset.factors, i, bound))
    return bound


def _bmm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean matrix product."""
    return (x.astype(np.int32) @ y.astype(np.int32)) > 0


class StageSystem:
    """A system: finite stages and a reflexive relation ``|>`` between comparable stages."""

    has_emb = False
    has_proj = False
    # set when a construction guarantees that |> within one stage is equality;
    # only used to avoid witness searches while enumerating function spaces
    declared_standard = False

    def __init__(self, name: str, index: IndexPoset, filter: FilterSpec | None = None,
                 max_stage: Index | None = None):
        self.name = name
        self.index = index
        self.filter = filter if filter is not None else default_filter(index)
        self.max_stage = max_stage
        self._rel: dict = {}
        self._pos: dict = {}
        self._con: dict = {}
        self._arr: dict = {}

    # --- to be supplied by subclasses
    def stage(self, i: Index) -> tuple:
        raise NotImplementedError

    def pmap(self, i2: Index, a2: State, i: Index, a: State) -> bool:
        raise NotImplementedError

    def state_name(self, a: State) -> str:
        return str(a)

    # --- derived
    def label(self, i: Index, a: State) -> str:
        return f"{self.state_name(a)}@{self.index.fmt(i)}"

    def position(self, i: Index, a: State) -> int:
        table = self._pos.get(i)
        if table is None:
            table = {s: n for n, s in enumerate(self.stage(i))}
            self._pos[i] = table
        try:
            return table[a]
        except KeyError:
            raise InputError(f"{self.state_name(a)!s} is not a state of {self.name} at {self.index.fmt(i)}") from None

    def contains_state(self, i: Index, a: State) -> bool:
        try:
            self.position(i, a)
            return True
        except InputError:
            return False

    def relation(self, i2: Index, i: Index) -> np.ndarray:
        """``R[x, y] = stage(i2)[x] |> stage(i)[y]``."""
        key = (i2, i)
        r = self._rel.get(key)
        if r is None:
            if not self.index.leq(i, i2):
                raise InputError(f"|> needs {self.index.fmt(i)} <= {self.index.fmt(i2)}")
            r = self._build_relation(i2, i)
            r.setflags(write=False)
            self._rel[key] = r
        return r

    def _build_relation(self, i2, i) -> np.ndarray:
        s2, s = self.stage(i2), self.stage(i)
        return np.array([[bool(self.pmap(i2, a2, i, a)) for a in s] for a2 in s2], dtype=bool).reshape(len(s2), len(s))

    def ceiling(self, i: Index, j: Index, bound: Index | None = None) -> Index:
        """Highest stage searched for a consistency witness: the join plus two steps."""
        p = self.index
        c = p.succ(p.succ(p.join(i, j)))
        if bound is not None:
            c = cap_index(p, c, bound)
        return c

    def witness_stages(self, i: Index, j: Index, bound: Index | None = None) -> list:
        p = self.index
        top = self.ceiling(i, j, bound)
        return [k for k in p.upto(top) if p.leq(i, k) and p.leq(j, k)]

    def consistency(self, i: Index, j: Index, bound: Index | None = None) -> np.ndarray:
        """``C[x, y]``: some witness ``c`` at a stage above both has ``c |> x`` and ``c |> y``."""
        key = (i, j, bound)
        c = self._con.get(key)
        if c is None:
            c = np.zeros((len(self.stage(i)), len(self.stage(j))), dtype=bool)
            for k in self.witness_stages(i, j, bound):
                c |= _bmm(self.relation(k, i).T, self.relation(k, j))
            c.setflags(write=False)
            self._con[key] = c
        return c

    def consistent_within(self, i: Index) -> np.ndarray:
        if self.declared_standard:
            return np.eye(len(self.stage(i)), dtype=bool)
        return self.consistency(i, i)

    def stage_array(self, i: Index) -> np.ndarray:
        """Stage positions as an int array; for table-valued stages see FunctionSpace."""
        return np.arange(len(self.stage(i)))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class FactorSystem(StageSystem):
    """A stage system with embeddings ``emb(i, i', a)`` and projections ``proj(i', i, a)``."""

    has_emb = True
    has_proj = True

    def emb(self, i: Index, i2: Index, a: State) -> State:
        raise NotImplementedError

    def proj(self, i2: Index, i: Index, a: State) -> State:
        raise NotImplementedError

    def emb_table(self, i: Index, i2: Index) -> np.ndarray:
        key = ("emb", i, i2)
        t = self._arr.get(key)
        if t is None:
            t = np.array([self.position(i2, self.emb(i, i2, a)) for a in self.stage(i)], dtype=np.int64)
            self._arr[key] = t
        return t

    def proj_table(self, i2: Index, i: Index) -> np.ndarray:
        key = ("proj", i2, i)
        t = self._arr.get(key)
        if t is None:
            t = np.array([self.position(i, self.proj(i2, i, a)) for a in self.stage(i2)], dtype=np.int64)
            self._arr[key] = t
        return t


class RuleSystem(FactorSystem):
    """A factor system given by plain functions; ``emb``/``proj`` may be omitted."""

    def __init__(self, name: str, index: IndexPoset, stage: Callable[[Index], Sequence],
                 pmap: Callable[[Index, State, Index, State], bool],
                 emb: Callable | None = None, proj: Callable | None = None,
                 state_name: Callable[[State], str] = str, filter: FilterSpec | None = None,
                 max_stage: Index | None = None, standard: bool = False):
        super().__init__(name, index, filter, max_stage)
        self._stage_fn, self._pmap_fn = stage, pmap
        self._emb_fn, self._proj_fn = emb, proj
        self._name_fn = state_name
        self._stages: dict = {}
        self.has_emb = emb is not None
        self.has_proj = proj is not None
        self.declared_standard = standard

    def stage(self, i):
        s = self._stages.get(i)
        if s is None:
            self.index.validate(i)
            s = tuple(self._stage_fn(i))
            if not s:
                raise InputError(f"stage {self.index.fmt(i)} of {self.name} is empty")
            self._stages[i] = s
        return s

    def pmap(self, i2, a2, i, a):
        return bool(self._pmap_fn(i2, a2, i, a))

    def emb(self, i, i2, a):
        if self._emb_fn is None:
            raise InputError(f"{self.name} has no embeddings")
        return self._emb_fn(i, i2, a)

    def proj(self, i2, i, a):
        if self._proj_fn is None:
            raise InputError(f"{self.name} has no projections")
        return self._proj_fn(i2, i, a)

    def state_name(self, a):
        return self._name_fn(a)

    def with_maps(self, name: str | None = None, emb: Callable | None = None,
                  proj: Callable | None = None) -> "RuleSystem":
        """A copy with some maps replaced (used to build deliberately broken variants)."""
        return RuleSystem(name or self.name, self.index, self._stage_fn, self._pmap_fn,
                          emb or self._emb_fn, proj or self._proj_fn, self._name_fn,
                          self.filter, self.max_stage, self.declared_standard)


def consistent(sys: StageSystem, a: State, i: Index, b: State, j: Index, bound: Index | None = None) -> bool:
    """Bounded search for a common refinement of ``a@i`` and ``b@j``."""
    p = sys.index
    join = p.join(i, j)
    if bound is None:
        bound = sys.ceiling(i, j)
    elif not p.leq(join, bound):
        raise InputError(f"bound {p.fmt(bound)} is below the join {p.fmt(join)}")
    return bool(sys.consistency(i, j, bound)[sys.position(i, a), sys.position(j, b)])


# ---------------------------------------------------------------------------
# law suite

LAW_ANCHORS = {
    "FUN": "standard: consistency, |> and equality coincide within a stage",
    "FACTOR": "prefactor: across comparable stages consistency coincides with |>",
    "STAB": "stable: a' |> a and a consistent with b give a' |> b",
    "EMBDEF": "embeddings preserve consistency, start at the identity and compose up to consistency",
    "PROJDEF": "projections preserve consistency, start at the identity and compose up to consistency",
    "EPPAIR": "projecting an embedded state returns a consistent state",
    "EMBCOH": "embedding a refinement keeps it a refinement",
    "PROJCOH": "projecting a refinement to an intermediate stage keeps it a refinement",
    "PSURJ": "in a standard system with embeddings |> is a partial surjection",
}
LAW_ORDER = ["FUN", "FACTOR", "STAB", "EMBDEF", "PROJDEF", "EPPAIR", "EMBCOH", "PROJCOH", "PSURJ"]
_NEEDS = {"EMBDEF": "emb", "EMBCOH": "emb", "PROJDEF": "proj", "PROJCOH": "proj",
          "EPPAIR": "both", "PSURJ": "emb"}


def applicable_laws(sys: StageSystem) -> list[str]:
    out = []
    for law in LAW_ORDER:
        need = _NEEDS.get(law)
        if need is None or (need == "emb" and sys.has_emb) or (need == "proj" and sys.has_proj) \
                or (need == "both" and sys.has_emb and sys.has_proj):
            out.append(law)
    return out


def resolve_laws(sys: StageSystem, laws: str | Iterable[str]) -> list[str]:
    ok = applicable_laws(sys)
    if isinstance(laws, str):
        if laws == "all":
            return ok
        laws = [x.strip() for x in laws.split(",") if x.strip()]
    wanted = [law.upper() for law in laws]
    for law in wanted:
        if law not in LAW_ANCHORS:
            raise InputError(f"unknown law id {law!r}; known: {', '.join(LAW_ORDER)}")
        if law not in ok:
            raise InputError(f"law {law} does not apply to {sys.name} "
                             f"(embeddings: {sys.has_emb}, projections: {sys.has_proj})")
    return [law for law in LAW_ORDER if law in wanted]


class _Ctx:
    def __init__(self, sys: StageSystem, bound: Index):
        self.sys, self.bound = sys, bound
        p = sys.index
        self.idx = p.upto(bound)
        self.pairs = [(i, i2) for i in self.idx for i2 in self.idx if p.leq(i, i2)]
        self._triples = None

    @property
    def triples(self):
        if self._triples is None:
            p = self.sys.index
            self._triples = [(i, i2, i3) for (i, i2) in self.pairs for i3 in self.idx if p.leq(i2, i3)]
        return self._triples

    def C(self, i, j):
        return self.sys.consistency(i, j, self.bound)

    def R(self, i2, i):
        return self.sys.relation(i2, i)

    def lab(self, i, k):
        return self.sys.label(i, self.sys.stage(i)[int(k)])


def _first(mask: np.ndarray):
    hits = np.argwhere(mask)
    return None if len(hits) == 0 else tuple(int(x) for x in hits[0])


def _law_fun(c: _Ctx):
    for i in c.idx:
        n = len(c.sys.stage(i))
        eye = np.eye(n, dtype=bool)
        bad = _first((c.C(i, i) != eye) | (c.R(i, i) != eye))
        if bad:
            a, b = bad
            return {"a": c.lab(i, a), "b": c.lab(i, b), "consistent": bool(c.C(i, i)[a, b]),
                    "pmap": bool(c.R(i, i)[a, b]), "equal": a == b}
    return None


def _law_factor(c: _Ctx):
    for i, i2 in c.pairs:
        bad = _first(c.C(i2, i) != c.R(i2, i))
        if bad:
            x, y = bad
            return {"upper": c.lab(i2, x), "lower": c.lab(i, y), "consistent": bool(c.C(i2, i)[x, y]),
                    "pmap": bool(c.R(i2, i)[x, y])}
    return None


def _law_stab(c: _Ctx):
    for i, i2 in c.pairs:
        R, Ci = c.R(i2, i), c.C(i, i)
        bad = _first(_bmm(R, Ci) & ~R)
        if bad:
            x, b = bad
            a = int(np.argwhere(R[x] & Ci[:, b])[0][0])
            return {"upper": c.lab(i2, x), "refines": c.lab(i, a), "consistent-with": c.lab(i, b)}
    return None


def _maps_def(c: _Ctx, kind: str):
    sys = c.sys
    for i, i2 in c.pairs:
        if kind == "emb":
            T, src, dst = sys.emb_table(i, i2), i, i2
        else:
            T, src, dst = sys.proj_table(i2, i), i2, i
        Cs, Cd = c.C(src, src), c.C(dst, dst)
        bad = _first(Cs & ~Cd[np.ix_(T, T)])
        if bad:
            a, b = bad
            return {"clause": "preserves consistency", "map": f"{kind} {sys.index.fmt(src)}->{sys.index.fmt(dst)}",
                    "a": c.lab(src, a), "b": c.lab(src, b), "images": [c.lab(dst, T[a]), c.lab(dst, T[b])]}
        if i == i2:
            n = len(sys.stage(i))
            bad = _first(~Cs[T, np.arange(n)])
            if bad:
                a = bad[0]
                return {"clause": "identity up to consistency", "state": c.lab(i, a), "image": c.lab(i, T[a])}
    for i, i2, i3 in c.triples:
        if kind == "emb":
            step = sys.emb_table(i2, i3)[sys.emb_table(i, i2)]
            direct, top = sys.emb_table(i, i3), i3
            src = i
        else:
            step = sys.proj_table(i2, i)[sys.proj_table(i3, i2)]
            direct, top = sys.proj_table(i3, i), i
            src = i3
        bad = _first(~c.C(top, top)[step, direct])
        if bad:
            a = bad[0]
            return {"clause": "composition up to consistency", "state": c.lab(src, a),
                    "stages": [sys.index.fmt(x) for x in (i, i2, i3)],
                    "two-step": c.lab(top, step[a]), "direct": c.lab(top, direct[a])}
    return None


def _law_eppair(c: _Ctx):
    sys = c.sys
    for i, i2 in c.pairs:
        E, Q = sys.emb_table(i, i2), sys.proj_table(i2, i)
        back = Q[E]
        bad = _first(~c.C(i, i)[back, np.arange(len(back))])
        if bad:
            a = bad[0]
            return {"state": c.lab(i, a), "upper": sys.index.fmt(i2), "emb": c.lab(i2, E[a]), "proj": c.lab(i, back[a])}
    return None


def _law_embcoh(c: _Ctx):
    sys = c.sys
    for i, i2, i3 in c.triples:
        E = sys.emb_table(i2, i3)
        bad = _first(c.R(i2, i) & ~c.R(i3, i)[E, :])
        if bad:
            x, a = bad
            return {"refinement": c.lab(i2, x), "lower": c.lab(i, a), "embedded": c.lab(i3, E[x])}
    return None


def _law_projcoh(c: _Ctx):
    sys = c.sys
    for i, i2, i3 in c.triples:
        Q = sys.proj_table(i3, i2)
        bad = _first(c.R(i3, i) & ~c.R(i2, i)[Q, :])
        if bad:
            x, a = bad
            return {"refinement": c.lab(i3, x), "lower": c.lab(i, a), "projected": c.lab(i2, Q[x])}
    return None


def _law_psurj(c: _Ctx):
    for i, i2 in c.pairs:
        R = c.R(i2, i)
        rows = R.sum(axis=1)
        if (rows > 1).any():
            x = int(np.argmax(rows > 1))
            return {"clause": "partial function", "upper": c.lab(i2, x),
                    "images": [c.lab(i, y) for y in np.flatnonzero(R[x])]}
        cols = R.any(axis=0)
        if not cols.all():
            y = int(np.argmin(cols))
            return {"clause": "surjective", "lower": c.lab(i, y), "upper-stage": c.sys.index.fmt(i2)}
    return None


_CHECKS = {"FUN": _law_fun, "FACTOR": _law_factor, "STAB": _law_stab,
           "EMBDEF": lambda c: _maps_def(c, "emb"), "PROJDEF": lambda c: _maps_def(c, "proj"),
           "EPPAIR": _law_eppair, "EMBCOH": _law_embcoh, "PROJCOH": _law_projcoh, "PSURJ": _law_psurj}


def check_laws(sys: StageSystem, laws: str | Iterable[str] = "all", bound: Index | None = None) -> LawReport:
    """Exhaustively check the requested laws over all stage tuples ``<= bound``."""
    if bound is None:
        bound = sys.max_stage
    if bound is None:
        raise InputError(f"no bound given and {sys.name} has no default stage bound")
    sys.index.validate(bound)
    wanted = resolve_laws(sys, laws)
    c = _Ctx(sys, bound)
    rep = LawReport(sys.name, sys.index.fmt(bound),
                    meta={"stages": len(c.idx), "witness-ceiling": "join + 2 successor steps, capped at the bound"})
    for law in wanted:
        if law == "PSURJ":
            fun_ok = rep.verdict("FUN") is Verdict.PASS if "FUN" in rep else _law_fun(c) is None
            if not fun_ok:
                rep.add(law, LAW_ANCHORS[law], verdict=Verdict.SKIP, detail="system is not standard")
                continue
        rep.add(law, LAW_ANCHORS[law], _CHECKS[law](c))
    return rep


# ---------------------------------------------------------------------------
# function space


@dataclass(frozen=True)
class FnTable:
    """A finite map from the states of one stage to the states of another."""

    dom: tuple
    outs: tuple

    def __call__(self, a):
        try:
            return self.outs[self.dom.index(a)]
        except ValueError:
            raise InputError(f"{a!r} is outside the domain of this table") from None

    def as_dict(self) -> dict:
        return dict(zip(self.dom, self.outs))


class FunctionSpace(FactorSystem):
    """``[M -> N]``: consistency-preserving tables, related as a logical relation."""

    def __init__(self, M: FactorSystem, N: FactorSystem, cap: int | None = None, name: str | None = None):
        index = ProductIndex((M.index, N.index))
        filt = ProductFilter(index, M.filter, N.filter)
        mb = None if M.max_stage is None or N.max_stage is None else (M.max_stage, N.max_stage)
        super().__init__(name or f"[{M.name} -> {N.name}]", index, filt, mb)
        self.M, self.N = M, N
        self.cap = cap if cap is not None else enumeration_cap()
        self.has_emb = M.has_proj and N.has_emb
        self.has_proj = M.has_emb and N.has_proj
        self.declared_standard = N.declared_standard
        self._stages: dict = {}
        self._lookup: dict = {}

    def size(self, ij) -> int:
        i, j = self.index.validate(ij)
        return len(self.N.stage(j)) ** len(self.M.stage(i))

    def stage_array(self, ij):
        arr = self._arr.get(("stage", ij))
        if arr is None:
            i, j = self.index.validate(ij)
            nm, nn = len(self.M.stage(i)), len(self.N.stage(j))
            if nn ** nm > self.cap:
                raise ResourceError(f"function space stage {self.index.fmt(ij)} would have {nn}^{nm} "
                                    f"candidate tables, above the cap {self.cap}")
            arr = np.array(list(itertools.product(range(nn), repeat=nm)), dtype=np.int64).reshape(-1, nm)
            cm, cn = self.M.consistent_within(i), self.N.consistent_within(j)
            keep = np.ones(len(arr), dtype=bool)
            for a, b in zip(*np.nonzero(np.triu(cm, 1))):
                keep &= cn[arr[:, a], arr[:, b]]
            arr = arr[keep]
            arr.setflags(write=False)
            self._arr[("stage", ij)] = arr
            self._lookup[ij] = {tuple(row): n for n, row in enumerate(arr.tolist())}
        return arr

    def stage(self, ij):
        s = self._stages.get(ij)
        if s is None:
            arr = self.stage_array(ij)
            i, j = ij
            dom, cod = self.M.stage(i), self.N.stage(j)
            s = tuple(FnTable(dom, tuple(cod[k] for k in row)) for row in arr.tolist())
            self._stages[ij] = s
        return s

    def position(self, ij, f):
        if isinstance(f, FnTable):
            self.stage_array(ij)
            i, j = ij
            try:
                key = tuple(self.N.position(j, y) for y in f.outs)
            except InputError:
                key = None
            if key is not None and f.dom == self.M.stage(i) and key in self._lookup[ij]:
                return self._lookup[ij][key]
        raise InputError(f"{self.state_name(f)} is not a state of {self.name} at {self.index.fmt(ij)}")

    def table(self, ij, mapping: dict | Callable) -> FnTable:
        """Build the table at ``ij`` from a dict or a callable on domain states."""
        i, j = self.index.validate(ij)
        dom = self.M.stage(i)
        fn = mapping.__getitem__ if isinstance(mapping, dict) else mapping
        outs = tuple(fn(a) for a in dom)
        for y in outs:
            self.N.position(j, y)
        return FnTable(dom, outs)

    def state_name(self, f):
        if not isinstance(f, FnTable):
            return str(f)
        return "{" + ",".join(f"{self.M.state_name(a)}->{self.N.state_name(b)}" for a, b in zip(f.dom, f.outs)) + "}"

    def _build_relation(self, ij2, ij):
        (i2, j2), (i, j) = ij2, ij
        F2, F = self.stage_array(ij2), self.stage_array(ij)
        PM, PN = self.M.relation(i2, i), self.N.relation(j2, j)
        out = np.ones((len(F2), len(F)), dtype=bool)
        for a2, a in zip(*np.nonzero(PM)):
            out &= PN[F2[:, a2][:, None], F[:, a][None, :]]
        return out

    def pmap(self, ij2, f2, ij, f):
        (i2, j2), (i, j) = ij2, ij
        M, N = self.M, self.N
        for a2 in M.stage(i2):
            for a in M.stage(i):
                if M.pmap(i2, a2, i, a) and not N.pmap(j2, f2(a2), j, f(a)):
                    return False
        return True

    def emb(self, ij, ij2, f):
        (i, j), (i2, j2) = ij, ij2
        return FnTable(self.M.stage(i2), tuple(self.N.emb(j, j2, f(self.M.proj(i2, i, a2))) for a2 in self.M.stage(i2)))

    def proj(self, ij2, ij, f2):
        (i2, j2), (i, j) = ij2, ij
        return FnTable(self.M.stage(i), tuple(self.N.proj(j2, j, f2(self.M.emb(i, i2, a))) for a in self.M.stage(i)))

    def _reindex(self, ij, rows: np.ndarray) -> np.ndarray:
        self.stage_array(ij)
        look = self._lookup[ij]
        try:
            return np.array([look[tuple(r)] for r in rows.tolist()], dtype=np.int64)
        except KeyError as e:
            raise InputError(f"map leaves the stage {self.index.fmt(ij)}: {e}") from None

    def emb_table(self, ij, ij2):
        key = ("emb", ij, ij2)
        t = self._arr.get(key)
        if t is None:
            (i, j), (i2, j2) = ij, ij2
            F = self.stage_array(ij)
            rows = self.N.emb_table(j, j2)[F[:, self.M.proj_table(i2, i)]]
            t = self._reindex(ij2, rows)
            self._arr[key] = t
        return t

    def proj_table(self, ij2, ij):
        key = ("proj", ij2, ij)
        t = self._arr.get(key)
        if t is None:
            (i2, j2), (i, j) = ij2, ij
            F2 = self.stage_array(ij2)
            rows = self.N.proj_table(j2, j)[F2[:, self.M.emb_table(i, i2)]]
            t = self._reindex(ij, rows)
            self._arr[key] = t
        return t


def function_space(M: FactorSystem, N: FactorSystem, cap: int | None = None) -> FunctionSpace:
    return FunctionSpace(M, N, cap)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class SystemHom:
    """``Phi = (Phi_0, Phi^i)`` with the properties it claims to have."""

    index_map: Callable[[Index], Index]
    stage_map: Callable[[Index, State], State]
    name: str = "hom"
    strong: bool = False
    emb: bool = False
    proj: bool = False
    injective: bool = False
    surjective: bool = False


HOM_ANCHORS = {
    "MONO": "the index map is monotone",
    "HOM": "refinements are mapped to refinements",
    "STRONG": "refinements are reflected as well",
    "EMB": "the stage maps commute with embeddings",
    "PROJ": "the stage maps commute with projections",
    "INJ": "every stage map is injective",
    "SURJ": "every stage map is surjective",
}


def check_hom(hom: SystemHom, A: StageSystem, B: StageSystem, bound: Index | None = None) -> LawReport:
    if bound is None:
        bound = A.max_stage
    A.index.validate(bound)
    P, Q = A.index, B.index
    idx = P.upto(bound)
    pairs = [(i, i2) for i in idx for i2 in idx if P.leq(i, i2)]
    rep = LawReport(f"{hom.name}: {A.name} -> {B.name}", P.fmt(bound))
    phi0, phi = hom.index_map, hom.stage_map

    def lab(sys, i, a):
        return sys.label(i, a)

    cex = None
    for i, i2 in pairs:
        if not Q.leq(phi0(i), phi0(i2)):
            cex = {"i": P.fmt(i), "i'": P.fmt(i2), "images": [Q.fmt(phi0(i)), Q.fmt(phi0(i2))]}
            break
    rep.add("MONO", HOM_ANCHORS["MONO"], cex)

    fwd = bwd = None
    for i, i2 in pairs:
        j, j2 = phi0(i), phi0(i2)
        for a2 in A.stage(i2):
            for a in A.stage(i):
                src = A.pmap(i2, a2, i, a)
                dst = B.pmap(j2, phi(i2, a2), j, phi(i, a))
                if src and not dst and fwd is None:
                    fwd = {"refinement": lab(A, i2, a2), "lower": lab(A, i, a),
                           "images": [lab(B, j2, phi(i2, a2)), lab(B, j, phi(i, a))]}
                if dst and not src and bwd is None:
                    bwd = {"upper": lab(A, i2, a2), "lower": lab(A, i, a),
                           "images": [lab(B, j2, phi(i2, a2)), lab(B, j, phi(i, a))]}
    rep.add("HOM", HOM_ANCHORS["HOM"], fwd)

    def declared(flag, law, run):
        if not flag:
            rep.add(law, HOM_ANCHORS[law], verdict=Verdict.SKIP, detail="not declared")
        else:
            rep.add(law, HOM_ANCHORS[law], run())

    declared(hom.strong, "STRONG", lambda: bwd)

    def commute_emb():
        for i, i2 in pairs:
            for a in A.stage(i):
                lhs, rhs = phi(i2, A.emb(i, i2, a)), B.emb(phi0(i), phi0(i2), phi(i, a))
                if lhs != rhs:
                    return {"state": lab(A, i, a), "upper": P.fmt(i2),
                            "map-then-emb": lab(B, phi0(i2), rhs), "emb-then-map": lab(B, phi0(i2), lhs)}
        return None

    def commute_proj():
        for i, i2 in pairs:
            for a2 in A.stage(i2):
                lhs, rhs = phi(i, A.proj(i2, i, a2)), B.proj(phi0(i2), phi0(i), phi(i2, a2))
                if lhs != rhs:
                    return {"state": lab(A, i2, a2), "lower": P.fmt(i),
                            "map-then-proj": lab(B, phi0(i), rhs), "proj-then-map": lab(B, phi0(i), lhs)}
        return None

    declared(hom.emb, "EMB", commute_emb)
    declared(hom.proj, "PROJ", commute_proj)

    def inj():
        for i in idx:
            seen = {}
            for a in A.stage(i):
                b = phi(i, a)
                if b in seen:
                    return {"stage": P.fmt(i), "a": lab(A, i, seen[b]), "b": lab(A, i, a), "image": lab(B, phi0(i), b)}
                seen[b] = a
        return None

    def surj():
        for i in idx:
            hit = {phi(i, a) for a in A.stage(i)}
            for b in B.stage(phi0(i)):
                if b not in hit:
                    return {"stage": P.fmt(i), "missed": lab(B, phi0(i), b)}
        return None

    declared(hom.injective, "INJ", inj)
    declared(hom.surjective, "SURJ", surj)
    return rep


def identity_hom(name: str = "id", **flags) -> SystemHom:
    return SystemHom(lambda i: i, lambda i, a: a, name=name, **flags)
