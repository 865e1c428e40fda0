import pytest
from hypothesis import HealthCheck, given, settings

from hhl.assertions import alpha_eq
from hhl.logics import (EncodingError, TupleAssertion, UnaryAssertion, from_chl, from_fu,
                        from_hl, from_il, from_kfu, from_kil, from_kue, refinement_product)
from hhl.oracle import check_triple
from hhl.syntax import parse_assertion, parse_command
from hhl.universe import Universe

from logic_defs import LOGICS, TUPLE_U, differential, instance, small_commands

X = ("x",)


def A(text):
    return parse_assertion(text)


# ---------------------------------------------------------------- encodings

def test_hl_is_an_upper_bound():
    pre, post = from_hl(UnaryAssertion("true"), UnaryAssertion("0 <= p[x] && p[x] <= 9"))
    assert alpha_eq(pre, A("forall <p>. true"))
    assert alpha_eq(post, A("forall <q>. 0 <= q[x] && q[x] <= 9"))


def test_fu_is_a_nonempty_intersection():
    pre, post = from_fu(UnaryAssertion("true"), UnaryAssertion("p[x] = 3"))
    assert alpha_eq(post, A("exists <q>. q[x] = 3"))


def test_chl_tags_each_execution():
    _, post = from_chl(2, TupleAssertion("p1[y] >= p2[y]", 2), TupleAssertion("p1[y] >= p2[y]", 2))
    want = A("forall <p1>, <p2>. p1.L[t] = 1 && p2.L[t] = 2 ==> p1[y] >= p2[y]")
    assert alpha_eq(post, want)


def test_kfu_tags_each_execution():
    pre, _ = from_kfu(2, TupleAssertion("p1[x] < p2[x]", 2), TupleAssertion("true", 2))
    assert alpha_eq(pre, A("exists <p1>, <p2>. p1.L[t] = 1 && p2.L[t] = 2 && p1[x] < p2[x]"))


def test_il_with_empty_pre_is_an_empty_conjunction():
    u = Universe(pdomains={"x": (0, 1)}, max_card=2)
    pre, _ = from_il(UnaryAssertion("false"), UnaryAssertion("true"), u)
    assert alpha_eq(pre, A("true"))


@pytest.mark.parametrize("target, holds", [(3, True), (7, False)])
def test_il_reachability_after_havoc(target, holds):
    u = Universe(pdomains={"x": tuple(range(10))}, max_card=2, max_iter=2)
    c = parse_command("havoc x; assume x <= 5", X)
    pre, post = from_il(UnaryAssertion("p[x] = 0"), UnaryAssertion(f"p[x] = {target}"), u)
    assert check_triple(pre, c, post, u).holds is holds


def test_tag_clash_is_rejected():
    with pytest.raises(EncodingError, match="t"):
        from_chl(2, TupleAssertion("p1.L[t] = 1", 2), TupleAssertion("true", 2))
    with pytest.raises(EncodingError):
        from_kfu(2, TupleAssertion("true", 2), TupleAssertion("p2.L[t] = 0", 2))


def test_arity_errors():
    with pytest.raises(EncodingError):
        from_kue(1, 0, TupleAssertion("true", 1), TupleAssertion("true", 1))
    with pytest.raises(EncodingError):
        from_chl(2, TupleAssertion("true", 1), TupleAssertion("true", 2))
    with pytest.raises(EncodingError):
        TupleAssertion(parse_assertion("p3[x] = 0", states=("p1", "p2", "p3")), 2)


def test_kil_cardinality_condition():
    small = TUPLE_U.with_(ldomains={"t": (1, 2), "u": (0, 1, 2)})
    with pytest.raises(EncodingError, match="at least 4"):
        from_kil(2, TupleAssertion("true", 2), TupleAssertion("true", 2), small)


def test_kil_rejects_logical_preconditions():
    with pytest.raises(EncodingError, match="program variables"):
        from_kil(2, TupleAssertion("p1.L[g] = 0", 2), TupleAssertion("true", 2), TUPLE_U)


def test_kue_has_an_existential_witness_clause():
    pre, post = from_kue(1, 1, TupleAssertion("p1[h] != p2[h]", 2),
                         TupleAssertion("p1[l] = p2[l]", 2))
    assert alpha_eq(pre, A("(exists <w>. w.L[t] = 1 && w.L[u] = 2) && (forall <p1>, <p2>. "
                           "p1.L[t] = 1 && p1.L[u] = 1 && p2.L[t] = 1 && p2.L[u] = 2 "
                           "==> p1[h] != p2[h])"))
    want = A("forall <p1>. p1.L[t] = 1 && p1.L[u] = 1 ==> "
             "(exists <p2>. p2.L[t] = 1 && p2.L[u] = 2 && p1[l] = p2[l])")
    assert alpha_eq(post, want)


# ---------------------------------------------------------------- refinement

def refines(c1, c2):
    cmd, pre, post = refinement_product(parse_command(c1, X), parse_command(c2, X), "r")
    u = Universe(pdomains={"x": (0, 1, 2), "r": (0, 1, 2)}, max_card=2, max_iter=2)
    return check_triple(pre, cmd, post, u)


def test_assignment_refines_havoc():
    assert refines("havoc x", "x := 1").holds


def test_disjoint_outcomes_do_not_refine():
    assert refines("x := 1", "x := 2").refuted


def test_refinement_tag_must_be_fresh():
    with pytest.raises(EncodingError):
        refinement_product(parse_command("x := 1", X), parse_command("skip", X), "x")


@settings(max_examples=40, deadline=None)
@given(small_commands())
def test_refinement_is_reflexive(c):
    cmd, pre, post = refinement_product(c, c, "r")
    u = Universe(pdomains={"x": (0, 1), "r": (0, 1, 2)}, max_card=2, max_iter=2)
    assert check_triple(pre, cmd, post, u).holds


# ---------------------------------------------------------------- differential

@pytest.mark.parametrize("logic", sorted(LOGICS))
def test_encoding_agrees_with_the_definition(logic):
    @settings(max_examples=100, deadline=None, derandomize=True,
              suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
    @given(instance(logic))
    def run(inst):
        expected, status = differential(logic, *inst)
        assert status == ("holds" if expected else "refuted")
    run()
