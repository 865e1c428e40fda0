"""Backward syntactic transformations for assignment, havoc and assume.

Each transformation walks the assertion once, keeping track of the state
binders in scope; look-ups on bound states are rewritten, look-ups on rigid
(free) states are left alone.
"""

from itertools import count

from .assertions import (And, BoolLit, Box, Cmp, Emp, ExistsState, ExistsVal, EXTENDED,
                         ForallState, ForallVal, Low, Member, MemberLit, Or,
                         UnsupportedFragment, all_names, expand, lift_expr, lift_pred,
                         negate, rename_binders)
from .lang import LLook, PLook, QVar, leaves, map_expr


def _expr_names(e):
    out = set()
    for lf in leaves(e):
        if isinstance(lf, (PLook, LLook)):
            out.add(lf.state)
        elif isinstance(lf, QVar):
            out.add(lf.name)
    return out


def _check_fragment(a):
    if isinstance(a, EXTENDED):
        raise UnsupportedFragment(f"{type(a).__name__} is outside the transformable fragment")
    if isinstance(a, (Member, MemberLit)):
        raise UnsupportedFragment("membership atoms are outside the transformable fragment")


def _rewrite_lookups(e, bound, var, replace):
    def leaf(n):
        if isinstance(n, PLook) and n.var == var and n.state in bound:
            return replace(n.state)
        return n
    return map_expr(e, leaf)


def _walk(a, bound, on_state, var, replace):
    """Shared traversal; ``on_state`` decides what happens at state binders."""
    _check_fragment(a)
    if isinstance(a, BoolLit):
        return a
    if isinstance(a, Cmp):
        return Cmp(a.op, _rewrite_lookups(a.left, bound, var, replace),
                   _rewrite_lookups(a.right, bound, var, replace))
    if isinstance(a, (And, Or)):
        return type(a)(tuple(_walk(x, bound, on_state, var, replace) for x in a.args))
    if isinstance(a, (ForallVal, ExistsVal)):
        return type(a)(a.name, _walk(a.body, bound, on_state, var, replace), a.sort)
    if isinstance(a, (ForallState, ExistsState)):
        return on_state(a, bound | {a.name})
    raise UnsupportedFragment(f"unexpected node {type(a).__name__}")


def transform_assign(e, x, a):
    """Precondition transformer for ``x := e``."""
    a = expand(a)

    def replace(state):
        return lift_expr(e, state)

    def on_state(q, bound):
        return type(q)(q.name, _walk(q.body, bound, on_state, x, replace))

    return _walk(a, frozenset(), on_state, x, replace)


def transform_havoc(x, a, fresh_base="v"):
    """Precondition transformer for ``havoc x``.

    Introduces one value binder per state binder, named v0, v1, ... in
    traversal order and chosen fresh for ``a``.
    """
    a = expand(a)
    used = all_names(a)
    counter = count()

    def fresh():
        while True:
            n = f"{fresh_base}{next(counter)}"
            if n not in used:
                used.add(n)
                return n

    def go(node, bound):
        _check_fragment(node)
        if isinstance(node, (ForallState, ExistsState)):
            v = fresh()
            vmap_local = dict(bound)
            vmap_local[node.name] = v
            body = go(node.body, vmap_local)
            if isinstance(node, ForallState):
                return ForallState(node.name, ForallVal(v, body, x))
            return ExistsState(node.name, ExistsVal(v, body, x))
        if isinstance(node, BoolLit):
            return node
        if isinstance(node, Cmp):
            return Cmp(node.op, _rewrite_lookups(node.left, set(bound), x, lambda s: QVar(bound[s])),
                       _rewrite_lookups(node.right, set(bound), x, lambda s: QVar(bound[s])))
        if isinstance(node, (And, Or)):
            return type(node)(tuple(go(k, bound) for k in node.args))
        if isinstance(node, (ForallVal, ExistsVal)):
            return type(node)(node.name, go(node.body, bound), node.sort)
        raise UnsupportedFragment(f"unexpected node {type(node).__name__}")

    return go(a, {})


def transform_assume(p, a):
    """Precondition transformer for ``assume p``; ``p`` is a state predicate."""
    a = rename_binders(expand(a), _expr_names(p))

    def go(node):
        _check_fragment(node)
        if isinstance(node, (BoolLit, Cmp)):
            return node
        if isinstance(node, (And, Or)):
            return type(node)(tuple(go(k) for k in node.args))
        if isinstance(node, (ForallVal, ExistsVal)):
            return type(node)(node.name, go(node.body), node.sort)
        if isinstance(node, ForallState):
            return ForallState(node.name, Or((negate(lift_pred(p, node.name)), go(node.body))))
        if isinstance(node, ExistsState):
            return ExistsState(node.name, And((lift_pred(p, node.name), go(node.body))))
        raise UnsupportedFragment(f"unexpected node {type(node).__name__}")

    return go(a)
