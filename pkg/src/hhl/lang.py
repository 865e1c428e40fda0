"""Expression and command ASTs of the nondeterministic imperative language."""

from dataclasses import dataclass, field
from itertools import product

from . import values as V


# ---------------------------------------------------------------- expressions
# One expression AST serves three roles: program expressions (Var), state
# predicates over an implicit state (Var, LVar) and hyper-expressions over
# named states (PLook, LLook, QVar).

@dataclass(frozen=True)
class Lit:
    value: object


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class QVar:
    name: str


@dataclass(frozen=True)
class PLook:
    state: str
    var: str


@dataclass(frozen=True)
class LLook:
    state: str
    var: str


@dataclass(frozen=True)
class ListLit:
    items: tuple


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Compare:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class Logic:
    op: str  # "and" | "or" | "implies"
    args: tuple


LEAVES = (Lit, Var, LVar, QVar, PLook, LLook)


def children(e):
    if isinstance(e, (BinOp, Compare)):
        return (e.left, e.right)
    if isinstance(e, (Call, Logic)):
        return e.args
    if isinstance(e, ListLit):
        return e.items
    if isinstance(e, Not):
        return (e.arg,)
    return ()


def map_expr(e, leaf):
    """Rebuild ``e`` bottom-up, replacing each leaf node by ``leaf(node)``."""
    if isinstance(e, LEAVES):
        return leaf(e)
    if isinstance(e, BinOp):
        return BinOp(e.op, map_expr(e.left, leaf), map_expr(e.right, leaf))
    if isinstance(e, Compare):
        return Compare(e.op, map_expr(e.left, leaf), map_expr(e.right, leaf))
    if isinstance(e, Call):
        return Call(e.fn, tuple(map_expr(a, leaf) for a in e.args))
    if isinstance(e, Logic):
        return Logic(e.op, tuple(map_expr(a, leaf) for a in e.args))
    if isinstance(e, ListLit):
        return ListLit(tuple(map_expr(a, leaf) for a in e.items))
    if isinstance(e, Not):
        return Not(map_expr(e.arg, leaf))
    raise TypeError(f"not an expression: {e!r}")


def leaves(e):
    if isinstance(e, LEAVES):
        yield e
        return
    for c in children(e):
        yield from leaves(c)


def expr_pvars(e):
    return {x.name for x in leaves(e) if isinstance(x, Var)}


def expr_lvars(e):
    return {x.name for x in leaves(e) if isinstance(x, LVar)}


def compile_expr(e, leaf):
    """Compile ``e`` to a closure ``f(ctx) -> value``.

    ``leaf(node)`` supplies closures for leaf nodes other than literals.
    """
    if isinstance(e, Lit):
        v = e.value
        return lambda ctx: v
    if isinstance(e, LEAVES):
        return leaf(e)
    if isinstance(e, BinOp):
        op = e.op
        l, r = compile_expr(e.left, leaf), compile_expr(e.right, leaf)
        if op == "+":
            def f(ctx):
                a, b = l(ctx), r(ctx)
                if type(a) is int and type(b) is int:
                    return a + b
                return V.binop(op, a, b)
            return f
        return lambda ctx: V.binop(op, l(ctx), r(ctx))
    if isinstance(e, Call):
        fn = e.fn
        args = [compile_expr(a, leaf) for a in e.args]
        return lambda ctx: V.call(fn, [a(ctx) for a in args])
    if isinstance(e, ListLit):
        items = [compile_expr(a, leaf) for a in e.items]
        return lambda ctx: tuple(a(ctx) for a in items)
    if isinstance(e, Compare):
        op = e.op
        l, r = compile_expr(e.left, leaf), compile_expr(e.right, leaf)
        return lambda ctx: V.compare(op, l(ctx), r(ctx))
    if isinstance(e, Not):
        a = compile_expr(e.arg, leaf)
        return lambda ctx: not V.need_bool(a(ctx), "!")
    if isinstance(e, Logic):
        args = [compile_expr(a, leaf) for a in e.args]
        if e.op == "and":
            return lambda ctx: all(V.need_bool(a(ctx), "&&") for a in args)
        if e.op == "or":
            return lambda ctx: any(V.need_bool(a(ctx), "||") for a in args)
        a0, a1 = args
        return lambda ctx: (not V.need_bool(a0(ctx), "==>")) or V.need_bool(a1(ctx), "==>")
    raise TypeError(f"not an expression: {e!r}")


def _store_leaf(node):
    if isinstance(node, Var):
        name = node.name

        def f(store):
            try:
                return store[name]
            except KeyError:
                raise V.EvalError(f"unknown program variable {name}") from None
        return f
    raise V.EvalError(f"{node!r} is not allowed in a program expression")


def compile_program_expr(e):
    return compile_expr(e, _store_leaf)


def eval_program_expr(e, store):
    return compile_program_expr(e)(store)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class IntType:
    lo: object = None
    hi: object = None

    def values(self):
        if self.lo is None or self.hi is None:
            raise ValueError("unbounded int has no finite domain")
        return tuple(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class BoolType:
    def values(self):
        return (False, True)


@dataclass(frozen=True)
class ListType:
    elem: object
    maxlen: int

    def values(self):
        elems = self.elem.values()
        out = []
        for n in range(self.maxlen + 1):
            out.extend(product(elems, repeat=n))
        return tuple(out)


def parse_type_hint(text):
    """Parse a domain hint such as ``int(0..9)`` or ``list(int(0..1), maxlen 2)``."""
    from .syntax import parse_type
    return parse_type(text)


# ---------------------------------------------------------------- commands

@dataclass(frozen=True, eq=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: object


@dataclass(frozen=True)
class Havoc:
    var: str


@dataclass(frozen=True)
class Assume:
    cond: object


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class Choice:
    left: object
    right: object


@dataclass(frozen=True)
class Iter:
    body: object


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    other: object = field(default_factory=Skip)


@dataclass(frozen=True)
class While:
    cond: object
    body: object


def negate_cond(b):
    return Not(b)


def desugar(c):
    if isinstance(c, (Skip, Assign, Havoc, Assume)):
        return c
    if isinstance(c, Seq):
        return Seq(desugar(c.first), desugar(c.second))
    if isinstance(c, Choice):
        return Choice(desugar(c.left), desugar(c.right))
    if isinstance(c, Iter):
        return Iter(desugar(c.body))
    if isinstance(c, If):
        return Choice(Seq(Assume(c.cond), desugar(c.then)),
                      Seq(Assume(negate_cond(c.cond)), desugar(c.other)))
    if isinstance(c, While):
        return Seq(Iter(Seq(Assume(c.cond), desugar(c.body))), Assume(negate_cond(c.cond)))
    raise TypeError(f"not a command: {c!r}")


def sub_commands(c):
    if isinstance(c, Seq):
        return (c.first, c.second)
    if isinstance(c, Choice):
        return (c.left, c.right)
    if isinstance(c, Iter):
        return (c.body,)
    if isinstance(c, If):
        return (c.then, c.other)
    if isinstance(c, While):
        return (c.body,)
    return ()


def wr_vars(c):
    if isinstance(c, Assign):
        return {c.var}
    if isinstance(c, Havoc):
        return {c.var}
    out = set()
    for s in sub_commands(c):
        out |= wr_vars(s)
    return out


def command_exprs(c):
    if isinstance(c, Assign):
        return [c.expr]
    if isinstance(c, Assume):
        return [c.cond]
    if isinstance(c, (If, While)):
        return [c.cond]
    return []


def read_vars(c):
    out = set()
    for e in command_exprs(c):
        out |= expr_pvars(e)
    for s in sub_commands(c):
        out |= read_vars(s)
    return out


def all_vars(c):
    return wr_vars(c) | read_vars(c)


def flatten_seq(c):
    """Top-level statements of a Seq chain, left to right."""
    if isinstance(c, Seq):
        return flatten_seq(c.first) + flatten_seq(c.second)
    return [c]


def make_seq(stmts):
    stmts = list(stmts)
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def command_size(c):
    return 1 + sum(command_size(s) for s in sub_commands(c))


@dataclass(frozen=True)
class Program:
    pvars: dict
    lvars: dict
    body: object

    def __hash__(self):
        return hash((tuple(self.pvars.items()), tuple(self.lvars.items()), self.body))

    def check_declared(self):
        undeclared = all_vars(self.body) - set(self.pvars)
        if undeclared:
            raise ValueError(f"undeclared variable(s): {', '.join(sorted(undeclared))}")
