import pytest

from potfin.errors import ResourceError
from potfin.gallery import nat_system
from potfin.stlc import (BOOL, CORPUS, NAT, App, Arrow, Lam, Models, NatLit, Succ, StlcSyntaxError,
                         StlcTypeError, Var, check_consistency, interpret, parse, parse_type, reference_value, show,
                         typecheck)
from potfin.system import function_space


def test_parse_examples():
    assert parse(r"\x:nat. x") == Lam("x", NAT, Var("x"))
    assert parse(r"(\x:nat. succ x) 3") == App(Lam("x", NAT, Succ(Var("x"))), NatLit(3))
    assert parse("λx:bool. x") == Lam("x", BOOL, Var("x"))


def test_application_is_left_associative_and_arrows_right():
    assert parse("f x y") == App(App(Var("f"), Var("x")), Var("y"))
    assert parse_type("nat -> nat -> bool") == Arrow(NAT, Arrow(NAT, BOOL))
    assert parse_type("(nat -> nat) -> bool") == Arrow(Arrow(NAT, NAT), BOOL)


def test_succ_takes_an_application():
    assert parse("succ f x") == Succ(App(Var("f"), Var("x")))


@pytest.mark.parametrize("src,where", [(r"\x:nat", "1:7"), ("(1", "1:3"), ("1 $", "1:3"),
                                       ("if true then 1", "1:15"), ("\n  )", "2:3")])
def test_syntax_errors_carry_positions(src, where):
    with pytest.raises(StlcSyntaxError) as e:
        parse(src)
    assert str(e.value).startswith(where)


def test_end_of_input_is_named():
    with pytest.raises(StlcSyntaxError, match="end of input"):
        parse(r"\x:nat")


def test_typing_examples():
    assert typecheck(parse(r"\x:nat. x")) == Arrow(NAT, NAT)
    assert typecheck(parse(r"(\x:nat. succ x) 3")) == NAT


@pytest.mark.parametrize("src,msg", [("if 0 then 1 else 2", "scrutinee nat, expected bool"),
                                     ("x", "unbound variable x"),
                                     ("succ true", "type bool, expected nat"),
                                     ("1 2", "expected a function"),
                                     (r"(\x:nat. x) true", "type bool, expected nat"),
                                     ("if true then 1 else false", "nat and bool")])
def test_type_errors(src, msg):
    with pytest.raises(StlcTypeError, match=msg):
        typecheck(parse(src))


def test_show_round_trips_the_corpus():
    for src in CORPUS:
        t = parse(src)
        assert parse(show(t)) == t


def test_reference_values():
    assert reference_value(r"(\x:nat. succ x) 3") == 4
    assert reference_value(r"(\f:nat -> nat. f (f 1)) (\y:nat. succ y)") == 3
    assert reference_value("if false then true else false") is False


def test_interpretation_truncates_at_the_stage():
    src = r"(\x:nat. succ x) 3"
    assert interpret(src, 6) == 4
    assert interpret(src, 3) == 2
    assert interpret("7", 4) == 3


def test_lambda_is_a_table():
    F = function_space(nat_system(8), nat_system(8))
    assert interpret(r"\x:nat. x", 3) == F.table((3, 3), lambda a: a)
    assert interpret(r"\x:nat. succ x", 3) == F.table((3, 3), lambda a: min(a + 1, 2))


def test_higher_order_arguments_are_tabulated_lazily():
    # the argument stage nat -> nat at 8 has 8^8 tables, which are never enumerated
    assert interpret(r"(\f:nat -> nat. f (f 1)) (\y:nat. succ y)", 8) == 3


def test_returning_a_huge_table_hits_the_cap():
    with pytest.raises(ResourceError):
        interpret(r"\f:nat -> nat. f 0", 8)


def test_consistency_examples():
    assert check_consistency(r"\x:nat. x", 2, 4).ok
    assert check_consistency("true", 1, 8).ok
    assert check_consistency("3", 5, 6).ok
    rep = check_consistency("3", 2, 6)
    assert not rep.ok
    assert "truncated" in rep["CONS"].counterexample["note"]


def test_corpus_against_reference():
    models = Models(8)
    for src in CORPUS:
        if typecheck(parse(src)) != NAT:
            continue
        v = reference_value(src)
        for s in range(v + 1, 9):
            assert interpret(src, s, 8, models) == v
