"""Hyper-assertion AST and its purely syntactic operations.

Hyper-expressions reuse the expression nodes of :mod:`hhl.lang`; inside an
assertion, ``PLook``/``LLook`` name a state binder or a rigid state and
``QVar`` names a value binder or a rigid value.  State predicates (the
arguments of ``Box`` and ``Low``) additionally use ``Var``/``LVar`` for the
implicit current state.
"""

from dataclasses import dataclass
from itertools import count

from . import values as V
from .lang import (LLook, LVar, Lit, Logic, Not, PLook, QVar, Var, Compare,
                   leaves, map_expr)


class UnsupportedFragment(Exception):
    """Raised when an operation meets an atom outside its fragment."""


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class ForallVal:
    name: str
    body: object
    sort: object = None  # a variable name whose domain the binder ranges over


@dataclass(frozen=True)
class ExistsVal:
    name: str
    body: object
    sort: object = None


@dataclass(frozen=True)
class ForallState:
    name: str
    body: object


@dataclass(frozen=True)
class ExistsState:
    name: str
    body: object


@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class Box:
    pred: object


@dataclass(frozen=True)
class Low:
    expr: object


@dataclass(frozen=True)
class Member:
    """``state`` (with optional updates applied) belongs to the judged set."""
    state: str
    lupd: tuple = ()
    pupd: tuple = ()
    negated: bool = False


@dataclass(frozen=True)
class MemberLit:
    """A concrete extended state belongs to the judged set."""
    state: object
    negated: bool = False


@dataclass(frozen=True)
class Otimes:
    left: object
    right: object


@dataclass(frozen=True)
class BigOtimes:
    body: object


@dataclass(frozen=True)
class BigOtimesFamily:
    index: str
    body: object
    sort: object = None


@dataclass(frozen=True)
class AtMost:
    body: object


@dataclass(frozen=True)
class AtLeast:
    body: object


@dataclass(frozen=True)
class CardCmp:
    """``card{expr | state in S, guard} op bound``."""
    state: str
    expr: object
    guard: object
    op: str
    bound: object


TRUE = BoolLit(True)
FALSE = BoolLit(False)

EXTENDED = (Otimes, BigOtimes, BigOtimesFamily, AtMost, AtLeast, CardCmp)
VAL_Q = (ForallVal, ExistsVal)
STATE_Q = (ForallState, ExistsState)


def conj(*args):
    args = [a for a in args if a != TRUE]
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*args):
    args = [a for a in args if a != FALSE]
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(tuple(args))


def forall_states(names, body):
    for n in reversed(names):
        body = ForallState(n, body)
    return body


def exists_states(names, body):
    for n in reversed(names):
        body = ExistsState(n, body)
    return body


def sub_assertions(a):
    if isinstance(a, (And, Or)):
        return a.args
    if isinstance(a, (ForallVal, ExistsVal, ForallState, ExistsState, BigOtimes,
                      BigOtimesFamily, AtMost, AtLeast)):
        return (a.body,)
    if isinstance(a, Otimes):
        return (a.left, a.right)
    if isinstance(a, CardCmp):
        return (a.guard,)
    return ()


def rebuild(a, kids):
    kids = tuple(kids)
    if isinstance(a, And):
        return And(kids)
    if isinstance(a, Or):
        return Or(kids)
    if isinstance(a, ForallVal):
        return ForallVal(a.name, kids[0], a.sort)
    if isinstance(a, ExistsVal):
        return ExistsVal(a.name, kids[0], a.sort)
    if isinstance(a, ForallState):
        return ForallState(a.name, kids[0])
    if isinstance(a, ExistsState):
        return ExistsState(a.name, kids[0])
    if isinstance(a, BigOtimes):
        return BigOtimes(kids[0])
    if isinstance(a, BigOtimesFamily):
        return BigOtimesFamily(a.index, kids[0], a.sort)
    if isinstance(a, AtMost):
        return AtMost(kids[0])
    if isinstance(a, AtLeast):
        return AtLeast(kids[0])
    if isinstance(a, Otimes):
        return Otimes(kids[0], kids[1])
    if isinstance(a, CardCmp):
        return CardCmp(a.state, a.expr, kids[0], a.op, a.bound)
    return a


def binder(a):
    """(name, kind) introduced by ``a``; kind is 'state' or 'value'."""
    if isinstance(a, (ForallState, ExistsState)):
        return a.name, "state"
    if isinstance(a, (ForallVal, ExistsVal)):
        return a.name, "value"
    if isinstance(a, BigOtimesFamily):
        return a.index, "value"
    return None


def atom_exprs(a):
    """Hyper-expressions directly inside an atom (not below a binder)."""
    if isinstance(a, Cmp):
        return (a.left, a.right)
    if isinstance(a, Member):
        return tuple(e for _, e in a.lupd) + tuple(e for _, e in a.pupd)
    if isinstance(a, CardCmp):
        return (a.bound,)
    if isinstance(a, Box):
        return (a.pred,)
    if isinstance(a, Low):
        return (a.expr,)
    return ()


# ---------------------------------------------------------------- names

def all_names(a, acc=None):
    """Every identifier used anywhere in ``a`` (bound or free)."""
    acc = set() if acc is None else acc
    b = binder(a)
    if b:
        acc.add(b[0])
    if isinstance(a, Member):
        acc.add(a.state)
    if isinstance(a, CardCmp):
        acc.add(a.state)
        for lf in leaves(a.expr):
            _leaf_names(lf, acc)
    for e in atom_exprs(a):
        for lf in leaves(e):
            _leaf_names(lf, acc)
    for s in sub_assertions(a):
        all_names(s, acc)
    return acc


def _leaf_names(lf, acc):
    if isinstance(lf, (PLook, LLook)):
        acc.add(lf.state)
    elif isinstance(lf, QVar):
        acc.add(lf.name)


def fresh_name(base, avoid):
    if base not in avoid:
        return base
    for i in count(1):
        n = f"{base}{i}"
        if n not in avoid:
            return n


def free_refs(a):
    """(free state names, free value names) of ``a``."""
    states, vals = set(), set()
    _free(a, frozenset(), frozenset(), states, vals)
    return states, vals


def _expr_free(e, bs, bv, states, vals):
    for lf in leaves(e):
        if isinstance(lf, (PLook, LLook)) and lf.state not in bs:
            states.add(lf.state)
        elif isinstance(lf, QVar) and lf.name not in bv:
            vals.add(lf.name)


def _free(a, bs, bv, states, vals):
    if isinstance(a, Member):
        if a.state not in bs:
            states.add(a.state)
    if isinstance(a, CardCmp):
        _expr_free(a.expr, bs | {a.state}, bv, states, vals)
        _expr_free(a.bound, bs, bv, states, vals)
        _free(a.guard, bs | {a.state}, bv, states, vals)
        return
    for e in atom_exprs(a):
        _expr_free(e, bs, bv, states, vals)
    b = binder(a)
    if b and b[1] == "state":
        bs = bs | {b[0]}
    elif b:
        bv = bv | {b[0]}
    for s in sub_assertions(a):
        _free(s, bs, bv, states, vals)


def fv_prog(a):
    """Program variables appearing in look-ups (including Box/Low predicates)."""
    out = set()
    _walk_leaves(a, lambda lf: out.add(lf.var) if isinstance(lf, PLook) else
                 out.add(lf.name) if isinstance(lf, Var) else None)
    return out


def fv_log(a):
    out = set()
    _walk_leaves(a, lambda lf: out.add(lf.var) if isinstance(lf, LLook) else
                 out.add(lf.name) if isinstance(lf, LVar) else None)
    for m in walk(a):
        if isinstance(m, Member):
            out.update(x for x, _ in m.lupd)
    return out


def walk(a):
    yield a
    for s in sub_assertions(a):
        yield from walk(s)


def _walk_leaves(a, f):
    for node in walk(a):
        exprs = list(atom_exprs(node))
        if isinstance(node, CardCmp):
            exprs.append(node.expr)
        for e in exprs:
            for lf in leaves(e):
                f(lf)


# ---------------------------------------------------------------- lifting

def lift_expr(e, state):
    """Instantiate the implicit state of a state expression with ``state``."""
    def leaf(n):
        if isinstance(n, Var):
            return PLook(state, n.name)
        if isinstance(n, LVar):
            return LLook(state, n.name)
        return n
    return map_expr(e, leaf)


def lift_pred(p, state):
    """Turn a boolean state predicate into an assertion about ``state``."""
    if isinstance(p, Lit) and type(p.value) is bool:
        return BoolLit(p.value)
    if isinstance(p, Logic):
        parts = [lift_pred(x, state) for x in p.args]
        if p.op == "and":
            return And(tuple(parts))
        if p.op == "or":
            return Or(tuple(parts))
        return Or((negate(parts[0]), parts[1]))
    if isinstance(p, Not):
        return negate(lift_pred(p.arg, state))
    if isinstance(p, Compare):
        return Cmp(p.op, lift_expr(p.left, state), lift_expr(p.right, state))
    return Cmp("=", lift_expr(p, state), Lit(True))


def expr_to_assertion(e):
    """Boolean hyper-expression (no implicit state) as an assertion."""
    return lift_pred(e, None)


def state_eq(s1, s2, pvars, lvars):
    """Expansion of ``s1 = s2`` over the declared variables."""
    parts = [Cmp("=", PLook(s1, x), PLook(s2, x)) for x in sorted(pvars)]
    parts += [Cmp("=", LLook(s1, x), LLook(s2, x)) for x in sorted(lvars)]
    return conj(*parts)


# ---------------------------------------------------------------- expansion

def expand(a, avoid=None):
    """Replace Emp, Box and Low by their quantified definitions."""
    avoid = set(all_names(a)) if avoid is None else avoid
    if isinstance(a, Emp):
        n = fresh_name("s", avoid)
        avoid.add(n)
        return ForallState(n, FALSE)
    if isinstance(a, Box):
        n = fresh_name("s", avoid)
        avoid.add(n)
        return ForallState(n, lift_pred(a.pred, n))
    if isinstance(a, Low):
        n1 = fresh_name("s1", avoid)
        avoid.add(n1)
        n2 = fresh_name("s2", avoid)
        avoid.add(n2)
        return ForallState(n1, ForallState(n2, Cmp("=", lift_expr(a.expr, n1),
                                                   lift_expr(a.expr, n2))))
    kids = sub_assertions(a)
    if not kids:
        return a
    return rebuild(a, [expand(k, avoid) for k in kids])


# ---------------------------------------------------------------- negation

def negate(a):
    if isinstance(a, BoolLit):
        return BoolLit(not a.value)
    if isinstance(a, Cmp):
        return Cmp(V.CMP_COMPLEMENT[a.op], a.left, a.right)
    if isinstance(a, And):
        return Or(tuple(negate(x) for x in a.args))
    if isinstance(a, Or):
        return And(tuple(negate(x) for x in a.args))
    if isinstance(a, ForallVal):
        return ExistsVal(a.name, negate(a.body), a.sort)
    if isinstance(a, ExistsVal):
        return ForallVal(a.name, negate(a.body), a.sort)
    if isinstance(a, ForallState):
        return ExistsState(a.name, negate(a.body))
    if isinstance(a, ExistsState):
        return ForallState(a.name, negate(a.body))
    if isinstance(a, (Emp, Box, Low)):
        return negate(expand(a))
    if isinstance(a, Member):
        return Member(a.state, a.lupd, a.pupd, not a.negated)
    if isinstance(a, MemberLit):
        return MemberLit(a.state, not a.negated)
    raise UnsupportedFragment(f"{type(a).__name__} has no syntactic negation")


def implies(a, b):
    return Or((negate(a), b))


# ---------------------------------------------------------------- shape

@dataclass(frozen=True)
class ShapeReport:
    exists_state: bool
    forall_after_exists: bool
    fv_prog: frozenset
    fv_log: frozenset


def shape(a):
    flags = {"exists": False, "fae": False}

    def go(x, under_exists):
        if isinstance(x, (ExistsState, ExistsVal)):
            if isinstance(x, ExistsState):
                flags["exists"] = True
            go(x.body, True)
            return
        if isinstance(x, (ForallState, Emp, Box, Low)):
            if under_exists:
                flags["fae"] = True
        for k in sub_assertions(x):
            go(k, under_exists)

    go(a, False)
    return ShapeReport(flags["exists"], flags["fae"], frozenset(fv_prog(a)), frozenset(fv_log(a)))


# ---------------------------------------------------------------- normal form

def normal_form(a, ignore_sorts=False):
    """Alpha-invariant canonical form (de Bruijn indices, flattened And/Or,
    unordered sides of = and !=)."""
    return _nf(expand(a), (), ignore_sorts)


def alpha_eq(a, b, ignore_sorts=False):
    return normal_form(a, ignore_sorts) == normal_form(b, ignore_sorts)


def _ref(name, stack):
    for i in range(len(stack) - 1, -1, -1):
        if stack[i] == name:
            return ("b", len(stack) - 1 - i)
    return ("f", name)


def _nf_expr(e, stack):
    if isinstance(e, Lit):
        return ("lit", V.value_key(e.value))
    if isinstance(e, PLook):
        return ("pl", _ref(e.state, stack), e.var)
    if isinstance(e, LLook):
        return ("ll", _ref(e.state, stack), e.var)
    if isinstance(e, QVar):
        return ("q", _ref(e.name, stack))
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, LVar):
        return ("lvar", e.name)
    from .lang import BinOp, Call, ListLit
    if isinstance(e, BinOp):
        return ("bin", e.op, _nf_expr(e.left, stack), _nf_expr(e.right, stack))
    if isinstance(e, Call):
        return ("call", e.fn) + tuple(_nf_expr(x, stack) for x in e.args)
    if isinstance(e, ListLit):
        return ("list",) + tuple(_nf_expr(x, stack) for x in e.items)
    if isinstance(e, Compare):
        return ("cmpe", e.op, _nf_expr(e.left, stack), _nf_expr(e.right, stack))
    if isinstance(e, Not):
        return ("note", _nf_expr(e.arg, stack))
    if isinstance(e, Logic):
        return ("loge", e.op) + tuple(_nf_expr(x, stack) for x in e.args)
    raise TypeError(f"not an expression: {e!r}")


def _flat(a, cls):
    out = []
    for x in a.args:
        if isinstance(x, cls):
            out.extend(_flat(x, cls))
        else:
            out.append(x)
    return out


def _nf(a, stack, ig):
    if isinstance(a, BoolLit):
        return ("bool", a.value)
    if isinstance(a, Cmp):
        sides = (_nf_expr(a.left, stack), _nf_expr(a.right, stack))
        if a.op in ("=", "!="):
            sides = tuple(sorted(sides, key=repr))  # equality is symmetric
        return ("cmp", a.op) + sides
    if isinstance(a, (And, Or)):
        cls = type(a)
        parts = _flat(a, cls)
        if not parts:
            return ("bool", cls is And)
        if len(parts) == 1:
            return _nf(parts[0], stack, ig)
        return ("and" if cls is And else "or",) + tuple(_nf(x, stack, ig) for x in parts)
    if isinstance(a, (ForallVal, ExistsVal)):
        tag = "allv" if isinstance(a, ForallVal) else "exv"
        return (tag, None if ig else a.sort, _nf(a.body, stack + (a.name,), ig))
    if isinstance(a, (ForallState, ExistsState)):
        tag = "alls" if isinstance(a, ForallState) else "exs"
        return (tag, _nf(a.body, stack + (a.name,), ig))
    if isinstance(a, Member):
        return ("mem", _ref(a.state, stack),
                tuple(sorted((x, _nf_expr(e, stack)) for x, e in a.lupd)),
                tuple(sorted((x, _nf_expr(e, stack)) for x, e in a.pupd)), a.negated)
    if isinstance(a, MemberLit):
        return ("memlit", a.state.sort_key(), a.negated)
    if isinstance(a, Otimes):
        return ("otimes", _nf(a.left, stack, ig), _nf(a.right, stack, ig))
    if isinstance(a, BigOtimes):
        return ("bigotimes", _nf(a.body, stack, ig))
    if isinstance(a, BigOtimesFamily):
        return ("family", None if ig else a.sort, _nf(a.body, stack + (a.index,), ig))
    if isinstance(a, AtMost):
        return ("atmost", _nf(a.body, stack, ig))
    if isinstance(a, AtLeast):
        return ("atleast", _nf(a.body, stack, ig))
    if isinstance(a, CardCmp):
        inner = stack + (a.state,)
        return ("card", _nf_expr(a.expr, inner), _nf(a.guard, inner, ig), a.op,
                _nf_expr(a.bound, stack))
    raise TypeError(f"not an assertion: {a!r}")


# ---------------------------------------------------------------- simplify

def simplify(a):
    """Drop value quantifiers whose variable does not occur in the body."""
    kids = sub_assertions(a)
    if not kids:
        return a
    a = rebuild(a, [simplify(k) for k in kids])
    if isinstance(a, (ForallVal, ExistsVal)):
        _, free_vals = free_refs(a.body)
        if a.name not in free_vals:
            return a.body
    return a


# ---------------------------------------------------------------- substitution

def rename_binders(a, avoid):
    """Alpha-rename every binder of ``a`` whose name is in ``avoid``."""
    avoid = set(avoid)
    used = all_names(a) | avoid

    def go(x, ren):
        b = binder(x)
        if isinstance(x, CardCmp):
            n = x.state
            new_ren = dict(ren)
            if n in avoid:
                nn = fresh_name(n, used)
                used.add(nn)
                new_ren[n] = nn
                n = nn
            else:
                new_ren.pop(n, None)
            return CardCmp(n, _rename_expr(x.expr, new_ren), go(x.guard, new_ren), x.op,
                           _rename_expr(x.bound, ren))
        if b:
            n = b[0]
            new_ren = dict(ren)
            if n in avoid:
                nn = fresh_name(n, used)
                used.add(nn)
                new_ren[n] = nn
            else:
                new_ren.pop(n, None)
            body = go(x.body, new_ren)
            nn = new_ren.get(n, n)
            if isinstance(x, BigOtimesFamily):
                return BigOtimesFamily(nn, body, x.sort)
            if isinstance(x, (ForallVal, ExistsVal)):
                return type(x)(nn, body, x.sort)
            return type(x)(nn, body)
        return _rename_atom(rebuild(x, [go(k, ren) for k in sub_assertions(x)]), ren)

    return go(a, {})


def _rename_expr(e, ren):
    if not ren:
        return e

    def leaf(n):
        if isinstance(n, PLook) and n.state in ren:
            return PLook(ren[n.state], n.var)
        if isinstance(n, LLook) and n.state in ren:
            return LLook(ren[n.state], n.var)
        if isinstance(n, QVar) and n.name in ren:
            return QVar(ren[n.name])
        return n
    return map_expr(e, leaf)


def _rename_atom(a, ren):
    if not ren:
        return a
    if isinstance(a, Cmp):
        return Cmp(a.op, _rename_expr(a.left, ren), _rename_expr(a.right, ren))
    if isinstance(a, Member):
        return Member(ren.get(a.state, a.state),
                      tuple((x, _rename_expr(e, ren)) for x, e in a.lupd),
                      tuple((x, _rename_expr(e, ren)) for x, e in a.pupd), a.negated)
    if isinstance(a, Box):
        return Box(_rename_expr(a.pred, ren))
    if isinstance(a, Low):
        return Low(_rename_expr(a.expr, ren))
    return a


def map_free_exprs(a, f):
    """Apply ``f(expr, bound_states, bound_values)`` to every expression of ``a``.

    Used for substitutions that target free names; the caller must make sure
    that replacements cannot be captured (see :func:`subst_free`).
    """
    def go(x, bs, bv):
        if isinstance(x, Cmp):
            return Cmp(x.op, f(x.left, bs, bv), f(x.right, bs, bv))
        if isinstance(x, Member):
            return Member(x.state, tuple((n, f(e, bs, bv)) for n, e in x.lupd),
                          tuple((n, f(e, bs, bv)) for n, e in x.pupd), x.negated)
        if isinstance(x, Box):
            return Box(f(x.pred, bs, bv))
        if isinstance(x, Low):
            return Low(f(x.expr, bs, bv))
        if isinstance(x, CardCmp):
            inner = bs | {x.state}
            return CardCmp(x.state, f(x.expr, inner, bv), go(x.guard, inner, bv), x.op,
                           f(x.bound, bs, bv))
        b = binder(x)
        if b and b[1] == "state":
            return rebuild(x, [go(x.body, bs | {b[0]}, bv)])
        if b:
            return rebuild(x, [go(x.body, bs, bv | {b[0]})])
        return rebuild(x, [go(k, bs, bv) for k in sub_assertions(x)])
    return go(a, frozenset(), frozenset())


def subst_free(a, values=None, states=None):
    """Capture-avoiding substitution of free value and state names.

    ``values`` maps value names to hyper-expressions; ``states`` maps state
    names to other state names.
    """
    values = values or {}
    states = states or {}
    danger = set(states.values())
    for e in values.values():
        for lf in leaves(e):
            _leaf_names(lf, danger)
    a = rename_binders(a, danger)

    def f(e, bs, bv):
        def leaf(n):
            if isinstance(n, QVar) and n.name in values and n.name not in bv:
                return values[n.name]
            if isinstance(n, PLook) and n.state in states and n.state not in bs:
                return PLook(states[n.state], n.var)
            if isinstance(n, LLook) and n.state in states and n.state not in bs:
                return LLook(states[n.state], n.var)
            return n
        return map_expr(e, leaf)

    out = map_free_exprs(a, f)
    if states:
        out = _subst_member_states(out, states, frozenset())
    return out


def _subst_member_states(a, states, bs):
    if isinstance(a, Member):
        if a.state in states and a.state not in bs:
            return Member(states[a.state], a.lupd, a.pupd, a.negated)
        return a
    b = binder(a)
    if b and b[1] == "state":
        bs = bs | {b[0]}
    if isinstance(a, CardCmp):
        return CardCmp(a.state, a.expr, _subst_member_states(a.guard, states, bs | {a.state}),
                       a.op, a.bound)
    kids = sub_assertions(a)
    if not kids:
        return a
    return rebuild(a, [_subst_member_states(k, states, bs) for k in kids])


def is_closed(a):
    s, v = free_refs(a)
    return not s and not v
