"""Judgments of other Hoare logics compiled into hyper-triples.

Source-logic assertions are ordinary hyper-assertions whose free state
names stand for the states (or the tuple of states) the source assertion
talks about.  ``UnaryAssertion("p[x] >= 0")`` describes a set of states,
``TupleAssertion("p1[x] >= p2[x]", 2)`` a set of pairs.

Relational encodings tag each state with the index of its execution in a
logical variable (``t`` by default); k-IL and k-UE use a second logical
variable (``u``) for the identity of the initial tuple or for the
universal/existential side.
"""

from dataclasses import dataclass
from itertools import product
from math import prod

from .assertions import (Cmp, ExistsState, ForallState, Member, MemberLit, Or, TRUE,
                         all_names, conj, disj, exists_states, forall_states, free_refs,
                         fresh_name, fv_log, implies)
from .lang import Assign, Choice, LLook, Lit, PLook, Seq, all_vars
from .sat import Compiled, RigidEnv
from .semantics import ExtState, canonical
from .syntax import parse_assertion


class EncodingError(ValueError):
    """A translation precondition (freshness, arity, finiteness) fails."""


def _check_refs(body, states):
    free_states, free_vals = free_refs(body)
    extra = free_states - set(states)
    if extra:
        raise EncodingError(f"assertion mentions undeclared state(s) {', '.join(sorted(extra))}")
    if free_vals:
        raise EncodingError(f"assertion has free value name(s) {', '.join(sorted(free_vals))}")


@dataclass(frozen=True)
class UnaryAssertion:
    """A set of extended states, described by a condition on one state name."""
    body: object
    state: str = "p"

    def __post_init__(self):
        if isinstance(self.body, str):
            object.__setattr__(self, "body", parse_assertion(self.body, states=(self.state,)))
        _check_refs(self.body, (self.state,))

    @property
    def states(self):
        return (self.state,)


@dataclass(frozen=True)
class TupleAssertion:
    """A set of k-tuples of extended states over the names ``p1 .. pk``."""
    body: object
    arity: int
    prefix: str = "p"

    def __post_init__(self):
        if self.arity < 1:
            raise EncodingError("tuple arity must be at least 1")
        if isinstance(self.body, str):
            object.__setattr__(self, "body", parse_assertion(self.body, states=self.states))
        _check_refs(self.body, self.states)

    @property
    def states(self):
        return tuple(f"{self.prefix}{i}" for i in range(1, self.arity + 1))


def _tag(state, var, i):
    return Cmp("=", LLook(state, var), Lit(i))


def _tags(states, var, first=1):
    return [_tag(s, var, first + i) for i, s in enumerate(states)]


def _fresh(names, *assertions):
    if len(set(names)) != len(names):
        raise EncodingError("tag variables must be distinct")
    for a in assertions:
        clash = set(names) & fv_log(a.body)
        if clash:
            raise EncodingError(f"logical variable {', '.join(sorted(clash))} occurs free "
                                f"in a source assertion; pick another tag name")


def _arity(k, *assertions):
    if k < 1:
        raise EncodingError("k must be at least 1")
    for a in assertions:
        if not isinstance(a, TupleAssertion) or a.arity != k:
            raise EncodingError(f"expected a {k}-tuple assertion")


# ---------------------------------------------------------------- single-execution logics

def from_hl(pre, post):
    """Hoare logic: every state of the set satisfies the condition."""
    return ForallState(pre.state, pre.body), ForallState(post.state, post.body)


def from_fu(pre, post):
    """Forward underapproximation: some state of the set satisfies the condition."""
    return ExistsState(pre.state, pre.body), ExistsState(post.state, post.body)


def enumerate_states(a, universe):
    """The finite state set described by ``a`` over the universe.

    ``a`` is either a :class:`UnaryAssertion` or an explicit collection of
    extended states.
    """
    if not isinstance(a, UnaryAssertion):
        return frozenset(a)
    try:
        grid = universe.grid()
    except ValueError as exc:
        raise EncodingError(f"cannot enumerate the assertion: {exc}") from None
    test = Compiled(a.body, universe, (a.state,))
    return frozenset(s for s in grid if test(frozenset(), RigidEnv({a.state: s})))


def from_il(pre, post, universe):
    """Incorrectness logic: the set contains every state of the condition."""
    def lower(a):
        return conj(*(MemberLit(s) for s in canonical(enumerate_states(a, universe))))
    return lower(pre), lower(post)


# ---------------------------------------------------------------- k-execution logics

def from_chl(k, pre, post, tag="t"):
    """Cartesian Hoare logic over k tagged executions."""
    _arity(k, pre, post)
    _fresh((tag,), pre, post)

    def upper(a):
        return forall_states(a.states, implies(conj(*_tags(a.states, tag)), a.body))
    return upper(pre), upper(post)


def from_kfu(k, pre, post, tag="t"):
    """k-execution forward underapproximation."""
    _arity(k, pre, post)
    _fresh((tag,), pre, post)

    def some(a):
        return exists_states(a.states, conj(*_tags(a.states, tag), a.body))
    return some(pre), some(post)


def _tuples(a, universe, tag):
    """Tagged tuples of the universe's states satisfying ``a``."""
    try:
        grid = universe.grid()
    except ValueError as exc:
        raise EncodingError(f"cannot enumerate the assertion: {exc}") from None
    slots = [[s for s in grid if s.logical.get(tag) == i] for i in range(1, a.arity + 1)]
    test = Compiled(a.body, universe, a.states)
    for combo in product(*slots):
        if test(frozenset(), RigidEnv(dict(zip(a.states, combo)))):
            yield combo


def from_kil(k, pre, post, universe, tag="t", ident="u"):
    """k-execution incorrectness logic.

    The identity value ranges over the universe's domain for ``ident``,
    which must have at least as many values as there are k-tuples of
    program states.  The existential over that domain is expanded into a
    finite disjunction.
    """
    _arity(k, pre, post)
    _fresh((tag, ident), pre, post)
    if fv_log(pre.body):
        raise EncodingError("the precondition must depend on program variables only")
    for name in (tag, ident):
        if name not in universe.ldomains:
            raise EncodingError(f"no finite domain for logical variable {name}")
    try:
        pstates = prod(len(universe.pdomains[x]) for x in universe.all_pvars())
    except KeyError as exc:
        raise EncodingError(f"no finite domain for program variable {exc.args[0]}") from None
    need = pstates ** k
    have = len(universe.ldomains[ident])
    if have < need:
        raise EncodingError(f"the domain of L.{ident} has {have} values but at least "
                            f"{need} (program states to the power {k}) are required")
    ids = universe.ldomains[ident]

    def lower(a):
        parts = {}
        for combo in _tuples(a, universe, tag):
            options = []
            for v in ids:
                members = frozenset(ExtState(s.logical.update({ident: v}), s.program)
                                    for s in combo)
                options.append(members)
            key = frozenset(options)
            parts.setdefault(key, options)
        clauses = []
        for options in parts.values():
            clauses.append(disj(*(conj(*(MemberLit(s) for s in canonical(m)))
                                  for m in options)))
        return conj(*clauses)
    return lower(pre), lower(post)


def from_kue(k1, k2, pre, post, tag="t", ident="u"):
    """k-universal-existential triples: k1 universal and k2 existential executions.

    States of the universal side carry ``ident = 1``, states of the
    existential side ``ident = 2``; the precondition demands one
    existential-side state per tag so that the existential side is never
    empty.
    """
    if k1 < 1 or k2 < 1:
        raise EncodingError("both arities must be at least 1")
    _arity(k1 + k2, pre, post)
    _fresh((tag, ident), pre, post)
    names = pre.states
    forall_side, exists_side = names[:k1], names[k1:]

    def side(states, n):
        return conj(*_tags(states, tag), *(_tag(s, ident, n) for s in states))

    used = all_names(pre.body) | set(names)
    w = fresh_name("w", used)
    witness = conj(*(ExistsState(w, conj(_tag(w, tag, i), _tag(w, ident, 2)))
                     for i in range(1, k2 + 1)))
    pre_h = conj(witness, forall_states(names, implies(conj(side(forall_side, 1),
                                                            side(exists_side, 2)),
                                                       pre.body)))
    qnames = post.states
    post_h = forall_states(qnames[:k1], implies(
        side(qnames[:k1], 1),
        exists_states(qnames[k1:], conj(side(qnames[k1:], 2), post.body))))
    return pre_h, post_h


# ---------------------------------------------------------------- refinement

def refinement_product(c1, c2, tag="t"):
    """Product command and hyper-triple stating that ``c2`` refines ``c1``.

    ``tag`` is a program variable recording which command ran; the
    postcondition says every outcome of ``c2`` is also an outcome of ``c1``
    from the same initial state.
    """
    if tag in all_vars(c1) | all_vars(c2):
        raise EncodingError(f"{tag} occurs in the commands; pick another tag name")
    command = Choice(Seq(Assign(tag, Lit(1)), c1), Seq(Assign(tag, Lit(2)), c2))
    post = ForallState("p", Or((Cmp("!=", PLook("p", tag), Lit(2)),
                                Member("p", (), ((tag, Lit(1)),)))))
    return command, TRUE, post


LOGICS = ("hl", "il", "fu", "kfu", "chl", "kil", "kue")
