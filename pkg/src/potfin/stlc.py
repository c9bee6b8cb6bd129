"""A small simply typed lambda calculus evaluated stage by stage.

Grammar::

    T ::= nat | bool | T -> T | (T)
    t ::= x | \\x:T. t | t t | 0,1,2,... | succ t | true | false
        | if t then t else t | (t)

Application is left associative, ``->`` is right associative, and ``\\``,
``if`` and ``succ`` extend as far right as possible (``λ`` also works for
``\\``).  ``succ`` takes one application-level argument, so ``succ f x``
parses as ``succ (f x)``.

A single global stage ``s`` fixes every type occurrence: ``nat`` lives at
``s``, ``bool`` at ``*``, and an arrow at the pair of its component stages.
Literals above the stage are truncated to ``s - 1`` and ``succ`` saturates
there, so every term has a value at every stage.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .errors import InputError, ResourceError
from .gallery import bool_system, nat_system
from .report import LawReport
from .system import FactorSystem, FnTable, function_space


class StlcError(InputError):
    """A lexical, syntax or type error, with a source position when known."""

    def __init__(self, msg: str, pos: tuple[int, int] | None = None):
        self.pos = pos
        super().__init__(f"{pos[0]}:{pos[1]}: {msg}" if pos else msg)


class StlcSyntaxError(StlcError):
    pass


class StlcTypeError(StlcError):
    pass


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Nat:
    def __str__(self):
        return "nat"


@dataclass(frozen=True)
class Bool:
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self):
        left = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{left} -> {self.cod}"


SimpleType = Nat | Bool | Arrow
NAT, BOOL = Nat(), Bool()


# ---------------------------------------------------------------------------
# terms; positions are kept out of equality


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    var: str
    ty: SimpleType
    body: "Term"
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NatLit:
    value: int
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Succ:
    arg: "Term"
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cond:
    test: "Term"
    then: "Term"
    orelse: "Term"
    pos: tuple = field(default=None, compare=False, repr=False)


Term = Var | Lam | App | NatLit | Succ | BoolLit | Cond


def show(t: Term) -> str:
    """Print a term back in the input syntax, fully parenthesised where needed."""
    match t:
        case Var(name):
            return name
        case NatLit(k):
            return str(k)
        case BoolLit(b):
            return "true" if b else "false"
        case Lam(x, ty, body):
            return f"\\{x}:{ty}. {show(body)}"
        case Succ(a):
            return f"succ {_atom(a)}"
        case App(f, a):
            left = show(f) if isinstance(f, (App, Var, NatLit, BoolLit)) else f"({show(f)})"
            return f"{left} {_atom(a)}"
        case Cond(c, a, b):
            return f"if {show(c)} then {show(a)} else {show(b)}"
    raise TypeError(t)


def _atom(t: Term) -> str:
    return show(t) if isinstance(t, (Var, NatLit, BoolLit)) else f"({show(t)})"


# ---------------------------------------------------------------------------
# lexer and parser

_TOKEN = re.compile(r"\s+|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<arrow>->)|(?P<sym>[\\λ:.()])")
_KEYWORDS = {"succ", "true", "false", "if", "then", "else", "nat", "bool"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: tuple


def _lex(text: str) -> list[_Tok]:
    toks, line, col, k = [], 1, 1, 0
    while k < len(text):
        m = _TOKEN.match(text, k)
        if m is None:
            raise StlcSyntaxError(f"unexpected character {text[k]!r}", (line, col))
        s = m.group(0)
        if m.lastgroup == "num":
            toks.append(_Tok("num", s, (line, col)))
        elif m.lastgroup == "id":
            toks.append(_Tok(s if s in _KEYWORDS else "id", s, (line, col)))
        elif m.lastgroup == "arrow":
            toks.append(_Tok("->", s, (line, col)))
        elif m.lastgroup == "sym":
            toks.append(_Tok("\\" if s == "λ" else s, s, (line, col)))
        for ch in s:
            line, col = (line + 1, 1) if ch == "\n" else (line, col + 1)
        k = m.end()
    toks.append(_Tok("eof", "", (line, col)))
    return toks


_ATOM_START = {"id", "num", "true", "false", "("}


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def next(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, kind: str, what: str) -> _Tok:
        if self.tok.kind != kind:
            self.fail(f"expected {what}")
        return self.next()

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        where = " at end of input" if t.kind == "eof" else ""
        raise StlcSyntaxError(f"syntax error{where}: {msg}, found {found}", t.pos)

    def type_(self) -> SimpleType:
        left = self.type_atom()
        if self.tok.kind == "->":
            self.next()
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> SimpleType:
        t = self.tok
        if t.kind == "nat":
            self.next()
            return NAT
        if t.kind == "bool":
            self.next()
            return BOOL
        if t.kind == "(":
            self.next()
            ty = self.type_()
            self.expect(")", "')'")
            return ty
        self.fail("expected a type")

    def term(self) -> Term:
        t = self.tok
        if t.kind == "\\":
            self.next()
            x = self.expect("id", "a variable name").text
            self.expect(":", "':'")
            ty = self.type_()
            self.expect(".", "'.'")
            return Lam(x, ty, self.term(), pos=t.pos)
        if t.kind == "if":
            self.next()
            c = self.term()
            self.expect("then", "'then'")
            a = self.term()
            self.expect("else", "'else'")
            return Cond(c, a, self.term(), pos=t.pos)
        return self.application()

    def application(self) -> Term:
        t = self.tok
        if t.kind == "succ":
            self.next()
            return Succ(self.application_or_binder(), pos=t.pos)
        fn = self.atom()
        while True:
            nt = self.tok
            if nt.kind in _ATOM_START:
                fn = App(fn, self.atom(), pos=nt.pos)
            elif nt.kind in ("\\", "if", "succ"):
                # a trailing binder or succ is the last argument
                fn = App(fn, self.term() if nt.kind != "succ" else self.application(), pos=nt.pos)
                return fn
            else:
                return fn

    def application_or_binder(self) -> Term:
        return self.term() if self.tok.kind in ("\\", "if") else self.application()

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "id":
            self.next()
            return Var(t.text, pos=t.pos)
        if t.kind == "num":
            self.next()
            return NatLit(int(t.text), pos=t.pos)
        if t.kind in ("true", "false"):
            self.next()
            return BoolLit(t.kind == "true", pos=t.pos)
        if t.kind == "(":
            self.next()
            inner = self.term()
            self.expect(")", "')'")
            return inner
        self.fail("expected a term")


def parse(text: str) -> Term:
    """Parse a term; raises ``StlcSyntaxError`` carrying ``line:column``."""
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    return t


def parse_type(text: str) -> SimpleType:
    p = _Parser(text)
    ty = p.type_()
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    return ty


# ---------------------------------------------------------------------------
# typing


def typecheck(t: Term, ctx: dict | None = None) -> SimpleType:
    ctx = {} if ctx is None else ctx
    match t:
        case Var(name):
            if name not in ctx:
                raise StlcTypeError(f"unbound variable {name}", t.pos)
            return ctx[name]
        case NatLit():
            return NAT
        case BoolLit():
            return BOOL
        case Succ(a):
            ta = typecheck(a, ctx)
            if ta != NAT:
                raise StlcTypeError(f"type mismatch: succ argument has type {ta}, expected nat", a.pos)
            return NAT
        case Lam(x, ty, body):
            return Arrow(ty, typecheck(body, {**ctx, x: ty}))
        case App(f, a):
            tf, ta = typecheck(f, ctx), typecheck(a, ctx)
            if not isinstance(tf, Arrow):
                raise StlcTypeError(f"type mismatch: applied term has type {tf}, expected a function", f.pos)
            if tf.dom != ta:
                raise StlcTypeError(f"type mismatch: argument has type {ta}, expected {tf.dom}", a.pos)
            return tf.cod
        case Cond(c, a, b):
            tc = typecheck(c, ctx)
            if tc != BOOL:
                raise StlcTypeError(f"type mismatch: scrutinee {tc}, expected bool", c.pos)
            ta, tb = typecheck(a, ctx), typecheck(b, ctx)
            if ta != tb:
                raise StlcTypeError(f"type mismatch: branches have types {ta} and {tb}", t.pos)
            return ta
    raise TypeError(t)


# ---------------------------------------------------------------------------
# stage-wise interpretation


def type_stage(ty: SimpleType, s: int):
    """The stage of a type occurrence under the global stage ``s``."""
    match ty:
        case Nat():
            return s
        case Bool():
            return "*"
        case Arrow(a, b):
            return (type_stage(a, s), type_stage(b, s))
    raise TypeError(ty)


class Models:
    """The factor system of every type, built once per bound."""

    def __init__(self, bound: int = 8, cap: int | None = None):
        if bound < 1:
            raise InputError("the stage bound must be >= 1")
        self.bound = bound
        self.cap = cap
        self._systems: dict = {}

    def system(self, ty: SimpleType) -> FactorSystem:
        sys = self._systems.get(ty)
        if sys is None:
            match ty:
                case Nat():
                    sys = nat_system(self.bound)
                case Bool():
                    sys = bool_system()
                case Arrow(a, b):
                    sys = function_space(self.system(a), self.system(b), self.cap)
            self._systems[ty] = sys
        return sys


def _domain(models: Models, ty: SimpleType, s: int) -> tuple:
    sys = models.system(ty)
    st = type_stage(ty, s)
    if isinstance(ty, Arrow):
        n = sys.size(st)
        if n > sys.cap:
            raise ResourceError(f"the stage {sys.index.fmt(st)} of {ty} has {n} tables, above the cap {sys.cap}")
    return tuple(sys.stage(st))


class _Closure:
    """A lambda value; applied directly and tabulated only when needed."""

    __slots__ = ("interp", "lam", "env")

    def __init__(self, interp: "_Interp", lam: Lam, env: dict):
        self.interp, self.lam, self.env = interp, lam, env

    def __call__(self, a):
        return self.interp.run(self.lam.body, {**self.env, self.lam.var: a})

    def key(self):
        return (id(self.lam), _env_key(self.env))


def _env_key(env: dict) -> tuple:
    return tuple(sorted((k, v.key() if isinstance(v, _Closure) else _hashable(v)) for k, v in env.items()))


def _hashable(v):
    return v if not isinstance(v, FnTable) else (v.dom, v.outs)


class _Interp:
    def __init__(self, models: Models, s: int):
        self.models, self.s = models, s
        self.top = s - 1
        self.memo: dict = {}

    def run(self, t: Term, env: dict) -> Any:
        match t:
            case Var(name):
                return env[name]
            case NatLit(k):
                return min(k, self.top)
            case BoolLit(b):
                return b
            case Succ(a):
                return min(self.run(a, env) + 1, self.top)
            case Cond(c, a, b):
                return self.run(a if self.run(c, env) else b, env)
            case App(f, a):
                fv, av = self.run(f, env), self.run(a, env)
                if isinstance(fv, FnTable):
                    # tables are looked up by state, so the argument must be a state too
                    av = self.table(av)
                return fv(av)
            case Lam():
                return _Closure(self, t, env)
        raise TypeError(t)

    def table(self, v):
        """Tabulate a closure over the domain stage of its parameter."""
        if not isinstance(v, _Closure):
            return v
        key = v.key()
        hit = self.memo.get(key)
        if hit is None:
            dom = _domain(self.models, v.lam.ty, self.s)
            hit = FnTable(dom, tuple(self.table(v(a)) for a in dom))
            self.memo[key] = hit
        return hit


def interpret(t: Term | str, s: int, bound: int = 8, models: Models | None = None):
    """The state of ``t`` at global stage ``s`` in the factor system of its type."""
    t = parse(t) if isinstance(t, str) else t
    typecheck(t)
    if not 1 <= s <= bound:
        raise InputError(f"stage {s} is outside 1..{bound}")
    models = models or Models(bound)
    run = _Interp(models, s)
    return run.table(run.run(t, {}))


def show_value(models: Models, ty: SimpleType, v) -> str:
    return models.system(ty).state_name(v)


CONS_ANCHOR = "interpretations at two stages are consistent"


def check_consistency(t: Term | str, s: int, s2: int, bound: int = 8, models: Models | None = None) -> LawReport:
    """Whether the value at ``s2`` refines the value at ``s`` in the system of the type."""
    t = parse(t) if isinstance(t, str) else t
    ty = typecheck(t)
    if s2 < s:
        raise InputError(f"the second stage {s2} must be at least {s}")
    models = models or Models(bound)
    sys = models.system(ty)
    lo, hi = interpret(t, s, bound, models), interpret(t, s2, bound, models)
    i, i2 = type_stage(ty, s), type_stage(ty, s2)
    rep = LawReport(f"term {show(t)} : {ty}", f"{s}..{s2}")
    cex = None
    if not sys.pmap(i2, hi, i, lo):
        cex = {"stage": s, "value": sys.state_name(lo), "finer-stage": s2, "finer-value": sys.state_name(hi),
               "note": "literals and successors at or above a stage are truncated to stage - 1, "
                       "so consistency is only expected for stages above the term's value"}
    rep.add("CONS", CONS_ANCHOR, cex)
    return rep


# ---------------------------------------------------------------------------
# reference evaluator: call by value, substitution of closed values


def _subst(t: Term, x: str, v: Term) -> Term:
    match t:
        case Var(name):
            return v if name == x else t
        case Lam(y, ty, body):
            return t if y == x else Lam(y, ty, _subst(body, x, v), pos=t.pos)
        case App(f, a):
            return App(_subst(f, x, v), _subst(a, x, v), pos=t.pos)
        case Succ(a):
            return Succ(_subst(a, x, v), pos=t.pos)
        case Cond(c, a, b):
            return Cond(_subst(c, x, v), _subst(a, x, v), _subst(b, x, v), pos=t.pos)
    return t


def reference_eval(t: Term | str) -> Term:
    """Big-step evaluation to a value term (a literal or a lambda)."""
    t = parse(t) if isinstance(t, str) else t
    typecheck(t)
    return _eval(t)


def _eval(t: Term) -> Term:
    match t:
        case NatLit() | BoolLit() | Lam():
            return t
        case Succ(a):
            return NatLit(_eval(a).value + 1)
        case Cond(c, a, b):
            return _eval(a if _eval(c).value else b)
        case App(f, a):
            lam, v = _eval(f), _eval(a)
            return _eval(_subst(lam.body, lam.var, v))
        case Var(name):
            raise StlcTypeError(f"unbound variable {name}", t.pos)
    raise TypeError(t)


def reference_value(t: Term | str):
    """The Python value of a closed ground term (``int`` or ``bool``), else the lambda term."""
    v = reference_eval(t)
    return v.value if isinstance(v, (NatLit, BoolLit)) else v


CORPUS: tuple[str, ...] = (
    r"\x:nat. x",
    r"(\x:nat. succ x) 3",
    r"succ (succ 0)",
    r"if true then 1 else 2",
    r"(\f:nat -> nat. f (f 1)) (\y:nat. succ y)",
    r"(\b:bool. if b then 0 else 5) false",
    r"\x:nat. succ x",
    r"(\x:nat. \y:nat. x) 2 4",
    r"\b:bool. if b then false else true",
    r"(\g:bool -> nat. g true) (\c:bool. if c then 3 else 0)",
    r"(\x:nat. if (\z:bool. z) true then x else 0) 6",
    r"\f:bool -> nat. f false",
)

# arrow terms whose results saturate at the top of a stage, so their
# tables at different stages are not refinements of one another
SATURATING: frozenset[str] = frozenset({r"\x:nat. succ x"})
