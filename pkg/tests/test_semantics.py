import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhl.lang import Choice, Iter, Seq, Skip
from hhl.semantics import (ExtState, Fuel, canonical, dumps_stateset, finals, sem,
                           stateset_from_json, terminates_all)
from hhl.syntax import parse_command
from hhl.values import EvalError

from strategies import DOM3, PVARS, commands, fuel_for, state_sets


def st1(**program):
    return ExtState({}, program)


# ---------------------------------------------------------------- examples

def test_finals_skip():
    assert finals(Skip(), {"x": 4}, Fuel()) == {st1(x=4).program}


def test_finals_assume_false_guard_is_stuck():
    assert finals(parse_command("assume x > 0", ["x"]), {"x": 0}, Fuel()) == set()


def test_finals_random_number_generation():
    c = parse_command("havoc x; assume 0 <= x && x <= 9", ["x"])
    out = finals(c, {"x": 5}, Fuel(3, {"x": tuple(range(-2, 12))}))
    assert sorted(s["x"] for s in out) == list(range(10))


def test_sem_skip_and_increment():
    S = frozenset({st1(x=2)})
    assert sem(Skip(), S, Fuel()) == S
    assert sem(parse_command("x := x + 1", ["x"]), S, Fuel()) == {st1(x=3)}


def test_sem_keeps_logical_part():
    S = frozenset({ExtState({"t": 1}, {"x": 0}), ExtState({"t": 2}, {"x": 0})})
    out = sem(parse_command("x := 7", ["x"]), S, Fuel())
    assert out == {ExtState({"t": 1}, {"x": 7}), ExtState({"t": 2}, {"x": 7})}


def test_terminates_all_examples():
    S = frozenset({st1(x=3)})
    assert not terminates_all(parse_command("assume false", ["x"]), S, Fuel())
    assert terminates_all(Skip(), S, Fuel())
    loop = parse_command("while (x > 0) { x := x - 1 }", ["x"])
    assert terminates_all(loop, S, Fuel(5))
    assert not terminates_all(loop, S, Fuel(2))


def test_dynamic_errors_are_reported():
    with pytest.raises(EvalError):
        finals(parse_command("x := x + true", ["x"]), {"x": 1}, Fuel())
    with pytest.raises(EvalError):
        finals(parse_command("x := [1][3]", ["x"]), {"x": 1}, Fuel())
    with pytest.raises(EvalError):
        finals(parse_command("x := x xor 1", ["x"]), {"x": -1}, Fuel())


def test_havoc_needs_a_domain():
    with pytest.raises(Exception, match="domain"):
        finals(parse_command("havoc x", ["x"]), {"x": 1}, Fuel())


def test_stateset_json_is_canonical_and_round_trips():
    S = frozenset({ExtState({"t": 1}, {"x": 10 ** 30}), ExtState({}, {"x": (1, True)})})
    text = dumps_stateset(S)
    assert stateset_from_json(text) == S
    assert dumps_stateset(set(reversed(canonical(S)))) == text
    assert '"1000000000000000000000000000000"' in text
    assert all(list(item) == sorted(item) for item in json.loads(text))


# ---------------------------------------------------------------- extended-semantics laws

def iterate_by_hand(c, S, fuel):
    """Union of sem(c^n, S) for n up to the iteration bound."""
    out, frontier = set(S), frozenset(S)
    for _ in range(fuel.max_iter):
        frontier = sem(c, frontier, fuel)
        out |= frontier
    return frozenset(out)


def check_semantic_laws(c1, c2, S1, S2, fuel):
    """All seven extended-semantics laws on one instance; returns failures."""
    bad = []
    s1, s2 = sem(c1, S1, fuel), sem(c1, S2, fuel)
    union = sem(c1, S1 | S2, fuel)
    if union != s1 | s2:
        bad.append("union")
    if not (s1 <= union and s2 <= union):
        bad.append("monotone")
    parts = [frozenset([s]) for s in S1 | S2]
    if frozenset().union(*[sem(c1, p, fuel) for p in parts]) != union:
        bad.append("indexed union")
    if sem(Skip(), S1, fuel) != S1:
        bad.append("skip")
    if sem(Seq(c1, c2), S1, fuel) != sem(c2, s1, fuel):
        bad.append("seq")
    if sem(Choice(c1, c2), S1, fuel) != s1 | sem(c2, S1, fuel):
        bad.append("choice")
    if sem(Iter(c1), S1, fuel) != iterate_by_hand(c1, S1, fuel):
        bad.append("iter")
    for s in sem(Seq(c1, c2), S1, fuel):
        if not any(s.logical == t.logical for t in S1):
            bad.append("logical preservation")
            break
    return bad


def law_instances():
    return st.tuples(commands(depth=4), commands(depth=4), state_sets(max_size=4),
                     state_sets(max_size=4), st.integers(0, 3))


@settings(max_examples=150, deadline=None)
@given(law_instances())
def test_semantic_laws(inst):
    c1, c2, S1, S2, n = inst
    assert check_semantic_laws(c1, c2, S1, S2, fuel_for(DOM3, n)) == []


@settings(max_examples=100, deadline=None)
@given(commands(depth=3), state_sets(max_size=3))
def test_fuel_is_monotone(c, S):
    assert sem(c, S, fuel_for(DOM3, 1)) <= sem(c, S, fuel_for(DOM3, 3))
