import pytest
from hypothesis import given, settings

from hhl.lang import (Assign, Assume, BinOp, Choice, Havoc, If, Iter, Lit, Not, Seq, Skip,
                      Var, While, desugar, flatten_seq, sub_commands, wr_vars)
from hhl.syntax import (SyntaxError_, assertion_str, command_str, parse_assertion,
                        parse_command, parse_program, program_str)

from strategies import CORPUS, PVARS, assertions, commands

FIB = (CORPUS / "fib.hhl").read_text()


def no_sugar(c):
    return not isinstance(c, (If, While)) and all(no_sugar(s) for s in sub_commands(c))


def test_parse_havoc_then_assume():
    p = parse_program("vars x:int(0..9); havoc x; assume 0 <= x && x <= 9")
    assert isinstance(p.body, Seq)
    assert p.body.first == Havoc("x")
    assert isinstance(p.body.second, Assume)
    assert list(p.pvars) == ["x"]


def test_parse_minimal_program():
    assert parse_program("vars x:int(0..0); skip").body == Skip()


def test_fib_is_a_while_with_four_statements():
    body = flatten_seq(parse_program(FIB).body)
    assert [type(s) for s in body] == [Assign, Assign, Assign, While]
    assert len(flatten_seq(body[-1].body)) == 4


def test_parse_errors_carry_locations():
    with pytest.raises(SyntaxError_, match="undeclared variable y"):
        parse_program("vars x:int; y := 1")
    with pytest.raises(SyntaxError_, match="duplicate declaration of x"):
        parse_program("vars x:int, x:int; skip")
    with pytest.raises(SyntaxError_, match="line 1, column"):
        parse_program("vars x:int; x := ")


def test_choice_and_iter_syntax():
    c = parse_command("{ x := 1 } [] { iter { havoc x } }", PVARS)
    assert c == Choice(Assign("x", Lit(1)), Iter(Havoc("x")))


def test_desugar_if():
    b = parse_command("if (x > 0) { x := 1 } else { skip }", PVARS)
    assert desugar(b) == Choice(Seq(Assume(b.cond), Assign("x", Lit(1))),
                                Seq(Assume(Not(b.cond)), Skip()))


def test_desugar_while():
    w = parse_command("while (x > 0) { x := x - 1 }", PVARS)
    body = Assign("x", BinOp("-", Var("x"), Lit(1)))
    assert desugar(w) == Seq(Iter(Seq(Assume(w.cond), body)), Assume(Not(w.cond)))


def test_desugar_skip():
    assert desugar(Skip()) == Skip()


def test_wr_vars_examples():
    assert wr_vars(parse_command("x := y + 1", PVARS)) == {"x"}
    assert wr_vars(parse_command("assume x > 0", PVARS)) == set()
    assert wr_vars(parse_program(FIB).body) == {"a", "b", "i", "tmp"}
    loop = flatten_seq(parse_program(FIB).body)[-1]
    assert wr_vars(loop) == {"a", "b", "i", "tmp"}


def test_program_round_trip():
    p = parse_program(FIB)
    assert parse_program(program_str(p)) == p


@settings(max_examples=300, deadline=None)
@given(commands(depth=6))
def test_command_round_trip(c):
    assert parse_command(command_str(c), PVARS) == c


@settings(max_examples=300, deadline=None)
@given(assertions(depth=4))
def test_assertion_round_trip(a):
    assert parse_assertion(assertion_str(a), PVARS) == a


@settings(max_examples=200, deadline=None)
@given(commands(depth=5))
def test_desugar_removes_sugar_and_is_idempotent(c):
    d = desugar(c)
    assert no_sugar(d)
    assert desugar(d) == d
    assert wr_vars(d) == wr_vars(c)


@settings(max_examples=200, deadline=None)
@given(commands(depth=3), commands(depth=3))
def test_wr_vars_is_a_homomorphism(c1, c2):
    assert wr_vars(Seq(c1, c2)) == wr_vars(c1) | wr_vars(c2)
    assert wr_vars(Choice(c1, c2)) == wr_vars(c1) | wr_vars(c2)
    assert wr_vars(Iter(c1)) == wr_vars(c1)
