"""Concrete syntax: a lark grammar for programs, state predicates and
hyper-assertions, the scope-aware conversion to ASTs, and pretty printers.

The grammar produces one untyped parse tree for all three languages; the
converters decide what a bare name means (program variable, value binder,
state binder) from the declarations and the binders in scope.
"""

from dataclasses import dataclass, field

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedInput, VisitError

from . import values as V
from .assertions import (And, AtLeast, AtMost, BigOtimes, BigOtimesFamily, BoolLit,
                         Box, CardCmp, Cmp, Emp, ExistsState, ExistsVal, ForallState,
                         ForallVal, Low, Member, MemberLit, Or, Otimes, TRUE, conj,
                         implies, lift_pred, negate, state_eq)
from .lang import (Assign, Assume, BinOp, BoolType, Call, Choice, Compare, Havoc, If,
                   IntType, Iter, LLook, ListLit, ListType, Lit, Logic, LVar, Not, PLook,
                   Program, QVar, Seq, Skip, Var, While)

GRAMMAR = r"""
start: program | "#formula" formula | "#type" type

program: decl_group* stmts

decl_group: "vars" decl ("," decl)* ";"        -> pvar_group
          | "lvars" decl ("," decl)* ";"       -> lvar_group
decl: NAME ":" type
type: "int" "(" SIGNED ".." SIGNED ")"           -> int_range
    | "int"                                      -> int_any
    | "bool"                                     -> bool_t
    | "list" "(" type "," "maxlen" INT ")"       -> list_t

stmts: stmt (";" stmt)* ";"?
?stmt: simple | choice
choice: block "[]" block
      | choice "[]" block
block: "{" stmts "}"
simple: "skip"                                   -> skip
      | NAME ":=" formula                        -> assign
      | "havoc" NAME                             -> havoc
      | "assume" formula                         -> assume
      | "iter" block                             -> iter
      | "if" "(" formula ")" block ["else" block] -> if_
      | "while" "(" formula ")" block            -> while_
      | block                                    -> plain_block

?formula: implies
?implies: otimes
        | otimes "==>" implies                   -> implies
?otimes: disj
       | otimes "(+)" disj                       -> otimes
?disj: conj
     | conj ("||" conj)+                         -> or_
?conj: neg
     | neg ("&&" neg)+                           -> and_
?neg: cmp
    | "!" neg                                    -> not_
?cmp: concat
    | concat (CMPOP concat)+                     -> chain
?concat: xorx
       | concat "++" xorx                        -> concat
?xorx: sum
     | xorx "xor" sum                            -> xor
?sum: prod
    | sum ADDOP prod                             -> addsub
?prod: unary
     | prod "*" unary                            -> mul
?unary: postfix
      | "-" unary                                -> neg_num
?postfix: atom
        | postfix "[" formula "]"                -> index
?atom: INT                                       -> int_lit
     | "true"                                    -> true_
     | "false"                                   -> false_
     | NAME                                      -> name
     | LNAME                                     -> lname
     | NAME DOTL NAME "]"                        -> llook
     | FN "(" formula ("," formula)* ")"         -> call
     | "[" formula ("," formula)* "]"            -> list_lit
     | "[" "]"                                   -> empty_list
     | "[]"                                      -> empty_list
     | "(" formula ")"
     | "emp"                                     -> emp
     | "box" "(" formula ")"                     -> box
     | "low" "(" formula ")"                     -> low
     | "prec" "(" formula "," formula ")"        -> prec
     | "member" "(" NAME ["with" upd ("," upd)*] ")"       -> member
     | "member" "(" "{" [mfield ("," mfield)*] "}" ")"    -> member_lit
     | "bigotimes" "(" formula ")"               -> bigotimes
     | "bigotimes" NAME [":" sort] "." formula   -> bigotimes_fam
     | "atmost" "(" formula ")"                  -> atmost
     | "atleast" "(" formula ")"                 -> atleast
     | "card" "{" formula "|" NAME "in" NAME ["," formula] "}" -> card
     | "forall" binder ("," binder)* ["in" NAME] "." formula  -> forall_q
     | "exists" binder ("," binder)* ["in" NAME] "." formula  -> exists_q

binder: NAME                                     -> bname
      | "<" NAME ">"                             -> bangle
      | NAME ":" sort                            -> bsorted
?sort: NAME | LNAME
upd: (NAME | LNAME) ":=" formula
mfield: (NAME | LNAME) ":" formula

FN.2: /(len|max|min)(?=\s*\()/
CMPOP: "==" | "=" | "!=" | "<=" | ">=" | "<" | ">"
ADDOP: "+" | "-"
DOTL.3: ".L["
LNAME.3: /L\.[A-Za-z_][A-Za-z0-9_']*/
NAME: /[A-Za-z_][A-Za-z0-9_']*/
SIGNED: /-?[0-9]+/
INT: /[0-9]+/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=True)


class SyntaxError_(ValueError):
    """Parse or scoping error, with a location when one is known."""


# ---------------------------------------------------------------- raw trees

@dataclass(frozen=True)
class R:
    """Untyped parse-tree node produced by the lark transformer."""
    tag: str
    args: tuple = ()
    line: int = 0
    column: int = 0


def _tok(t):
    return str(t) if isinstance(t, Token) else t


class _ToRaw(Transformer):
    def __default__(self, data, children, meta):
        line = getattr(meta, "line", 0) if not meta.empty else 0
        col = getattr(meta, "column", 0) if not meta.empty else 0
        return R(str(data), tuple(_tok(c) for c in children), line, col)


def _parse_raw(text):
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as exc:
        raise SyntaxError_(f"syntax error at line {exc.line}, column {exc.column}: "
                           f"{str(exc).splitlines()[0]}") from None
    except LarkError as exc:
        raise SyntaxError_(f"syntax error: {exc}") from None
    return _ToRaw().transform(tree).args[0]


def _err(node, msg):
    if isinstance(node, R) and node.line:
        return SyntaxError_(f"line {node.line}, column {node.column}: {msg}")
    return SyntaxError_(msg)


# ---------------------------------------------------------------- types

def _type(r):
    if r.tag == "int_range":
        lo, hi = int(r.args[0]), int(r.args[1])
        if lo > hi:
            raise _err(r, f"empty range {lo}..{hi}")
        return IntType(lo, hi)
    if r.tag == "int_any":
        return IntType()
    if r.tag == "bool_t":
        return BoolType()
    if r.tag == "list_t":
        return ListType(_type(r.args[0]), int(r.args[1]))
    raise _err(r, f"not a type: {r.tag}")


def parse_type(text):
    return _type(_parse_raw("#type " + text))


# ---------------------------------------------------------------- scopes

@dataclass
class Scope:
    """What names mean while converting a formula."""
    pvars: frozenset = frozenset()
    lvars: frozenset = frozenset()
    states: frozenset = frozenset()  # bound or rigid state names
    values: frozenset = frozenset()  # bound or rigid value names
    implicit: bool = False  # state-predicate mode: bare pvar names allowed
    program: bool = False  # program-expression mode

    def bind_state(self, n):
        return Scope(self.pvars, self.lvars, self.states | {n}, self.values - {n},
                     self.implicit, self.program)

    def bind_value(self, n):
        return Scope(self.pvars, self.lvars, self.states - {n}, self.values | {n},
                     self.implicit, self.program)

    def as_pred(self):
        return Scope(self.pvars, self.lvars, self.states, self.values, True, False)


_BINOP = {"concat": "++", "xor": "xor", "mul": "*"}


def _expr(r, sc):
    """Convert a raw node to an expression under scope ``sc``."""
    t = r.tag if isinstance(r, R) else None
    if t == "int_lit":
        return Lit(int(r.args[0]))
    if t == "true_":
        return Lit(True)
    if t == "false_":
        return Lit(False)
    if t == "name":
        n = r.args[0]
        if n in sc.values:
            return QVar(n)
        if (sc.program or sc.implicit) and n in sc.pvars:
            return Var(n)
        if sc.program:
            raise _err(r, f"undeclared variable {n}")
        raise _err(r, f"unbound name {n}")
    if t == "lname":
        n = r.args[0][2:]
        if sc.program:
            raise _err(r, "logical variables cannot appear in programs")
        if not sc.implicit:
            raise _err(r, f"L.{n} needs an implicit state; write p.L[{n}]")
        if sc.lvars and n not in sc.lvars:
            raise _err(r, f"undeclared logical variable {n}")
        return LVar(n)
    if t == "llook":
        st, _, var = r.args
        if st not in sc.states:
            raise _err(r, f"unbound state {st}")
        return LLook(st, var)
    if t == "index":
        base, idx = r.args
        if (isinstance(base, R) and base.tag == "name" and base.args[0] in sc.states
                and base.args[0] not in sc.values and not sc.program):
            if not (isinstance(idx, R) and idx.tag == "name"):
                raise _err(r, "state look-up needs a variable name")
            return PLook(base.args[0], idx.args[0])
        return BinOp("index", _expr(base, sc), _expr(idx, sc))
    if t in _BINOP:
        return BinOp(_BINOP[t], _expr(r.args[0], sc), _expr(r.args[1], sc))
    if t == "addsub":
        return BinOp(r.args[1], _expr(r.args[0], sc), _expr(r.args[2], sc))
    if t == "neg_num":
        inner = r.args[0]
        if isinstance(inner, R) and inner.tag == "int_lit":
            return Lit(-int(inner.args[0]))
        return BinOp("-", Lit(0), _expr(inner, sc))
    if t == "call":
        return Call(r.args[0], tuple(_expr(a, sc) for a in r.args[1:]))
    if t == "list_lit":
        return ListLit(tuple(_expr(a, sc) for a in r.args))
    if t == "empty_list":
        return Lit(())
    if t == "chain":
        parts = r.args
        cmps = []
        for i in range(1, len(parts), 2):
            op = "=" if parts[i] == "==" else parts[i]
            cmps.append(Compare(op, _expr(parts[i - 1], sc), _expr(parts[i + 1], sc)))
        return cmps[0] if len(cmps) == 1 else Logic("and", tuple(cmps))
    if t == "and_":
        return Logic("and", tuple(_expr(a, sc) for a in r.args))
    if t == "or_":
        return Logic("or", tuple(_expr(a, sc) for a in r.args))
    if t == "implies":
        return Logic("implies", (_expr(r.args[0], sc), _expr(r.args[1], sc)))
    if t == "not_":
        return Not(_expr(r.args[0], sc))
    if t == "prec":
        a, b = _expr(r.args[0], sc), _expr(r.args[1], sc)
        return Logic("and", (Compare("<=", Lit(0), a), Compare("<", a, b)))
    raise _err(r, f"'{t}' is not allowed in an expression")


def _lit_value(e):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, ListLit):
        return tuple(_lit_value(x) for x in e.items)
    raise SyntaxError_("member literal fields must be constants")


def _is_state_name(r, sc):
    return (isinstance(r, R) and r.tag == "name" and r.args[0] in sc.states
            and r.args[0] not in sc.values)


def _assertion(r, sc):
    """Convert a raw node to a hyper-assertion under scope ``sc``."""
    t = r.tag if isinstance(r, R) else None
    if t == "and_":
        return And(tuple(_assertion(a, sc) for a in r.args))
    if t == "or_":
        return Or(tuple(_assertion(a, sc) for a in r.args))
    if t == "implies":
        return implies(_assertion(r.args[0], sc), _assertion(r.args[1], sc))
    if t == "not_":
        return negate(_assertion(r.args[0], sc))
    if t == "true_":
        return BoolLit(True)
    if t == "false_":
        return BoolLit(False)
    if t == "otimes":
        return Otimes(_assertion(r.args[0], sc), _assertion(r.args[1], sc))
    if t == "emp":
        return Emp()
    if t == "box":
        return Box(_expr(r.args[0], sc.as_pred()))
    if t == "low":
        return Low(_expr(r.args[0], sc.as_pred()))
    if t == "bigotimes":
        return BigOtimes(_assertion(r.args[0], sc))
    if t == "bigotimes_fam":
        n, sort, body = r.args
        return BigOtimesFamily(n, _assertion(body, sc.bind_value(n)), sort)
    if t == "atmost":
        return AtMost(_assertion(r.args[0], sc))
    if t == "atleast":
        return AtLeast(_assertion(r.args[0], sc))
    if t == "member":
        st, *upds = r.args
        if st not in sc.states:
            raise _err(r, f"unbound state {st}")
        lupd, pupd = [], []
        for u in upds:
            if u is None:
                continue
            name, e = u.args
            if name.startswith("L."):
                lupd.append((name[2:], _expr(e, sc)))
            else:
                pupd.append((name, _expr(e, sc)))
        return Member(st, tuple(lupd), tuple(pupd))
    if t == "member_lit":
        lg, pg = {}, {}
        for f in r.args:
            if f is None:
                continue
            name, e = f.args
            v = _lit_value(_expr(e, sc))
            if name.startswith("L."):
                lg[name[2:]] = v
            else:
                pg[name] = v
        from .semantics import ExtState
        return MemberLit(ExtState(lg, pg))
    if t == "card":
        expr, st, sname, guard = r.args
        if sname != "S":
            raise _err(r, "card comprehensions range over S")
        inner = sc.bind_state(st)
        g = TRUE if guard is None else _assertion(guard, inner)
        return ("card", st, _expr(expr, inner), g)
    if t in ("forall_q", "exists_q"):
        return _quant(r, sc)
    if t == "chain":
        return _chain(r, sc)
    if t == "prec":
        a, b = _expr(r.args[0], sc), _expr(r.args[1], sc)
        return And((Cmp("<=", Lit(0), a), Cmp("<", a, b)))
    # any other boolean-valued expression
    e = _expr(r, sc)
    return lift_pred(e, None) if not isinstance(e, Compare) else Cmp(e.op, e.left, e.right)


def _chain(r, sc):
    parts = r.args
    out = []
    for i in range(1, len(parts), 2):
        op = "=" if parts[i] == "==" else parts[i]
        lhs, rhs = parts[i - 1], parts[i + 1]
        if isinstance(lhs, R) and lhs.tag == "card":
            _, st, e, g = _assertion(lhs, sc)
            out.append(CardCmp(st, e, g, op, _expr(rhs, sc)))
            continue
        if _is_state_name(lhs, sc) and _is_state_name(rhs, sc):
            if op not in ("=", "!="):
                raise _err(r, "states can only be compared with = or !=")
            eq = state_eq(lhs.args[0], rhs.args[0], sc.pvars, sc.lvars)
            out.append(eq if op == "=" else negate(eq))
            continue
        out.append(Cmp(op, _expr(lhs, sc), _expr(rhs, sc)))
    return out[0] if len(out) == 1 else And(tuple(out))


def _quant(r, sc):
    q = "forall" if r.tag == "forall_q" else "exists"
    rest = r.args
    body = rest[-1]
    in_name = rest[-2]
    binders = rest[:-2]
    is_state = in_name is not None or any(b.tag == "bangle" for b in binders)
    if in_name is not None and in_name != "S":
        raise _err(r, "state quantifiers range over S")
    names = []
    for b in binders:
        if is_state and b.tag == "bsorted":
            raise _err(r, "state binders cannot carry a sort")
        names.append((b.args[0], b.args[1] if b.tag == "bsorted" else None))
    inner = sc
    for n, _ in names:
        inner = inner.bind_state(n) if is_state else inner.bind_value(n)
    out = _assertion(body, inner)
    for n, sort in reversed(names):
        if is_state:
            out = ForallState(n, out) if q == "forall" else ExistsState(n, out)
        else:
            out = ForallVal(n, out, sort) if q == "forall" else ExistsVal(n, out, sort)
    return out


def _finish(a):
    if isinstance(a, tuple):
        raise SyntaxError_("a card comprehension must be compared with a bound")
    return a


# ---------------------------------------------------------------- public parsing

def parse_assertion(text, pvars=(), lvars=(), states=(), values=()):
    """Parse a hyper-assertion; ``states``/``values`` are rigid names in scope."""
    raw = _parse_raw("#formula " + text)
    sc = Scope(frozenset(pvars), frozenset(lvars), frozenset(states), frozenset(values))
    return _finish(_assertion(raw, sc))


def parse_pred(text, pvars=(), lvars=(), states=(), values=()):
    """Parse a state predicate/expression over an implicit state."""
    raw = _parse_raw("#formula " + text)
    sc = Scope(frozenset(pvars), frozenset(lvars), frozenset(states), frozenset(values),
               implicit=True)
    return _expr(raw, sc)


def parse_hexpr(text, states=(), values=()):
    raw = _parse_raw("#formula " + text)
    return _expr(raw, Scope(states=frozenset(states), values=frozenset(values)))


def parse_expr(text, pvars):
    raw = _parse_raw("#formula " + text)
    return _expr(raw, Scope(pvars=frozenset(pvars), program=True))


def _stmts(r, sc):
    items = [_stmt(s, sc) for s in r.args]
    out = items[-1]
    for s in reversed(items[:-1]):
        out = Seq(s, out)
    return out


def _stmt(r, sc):
    t = r.tag
    if t == "skip":
        return Skip()
    if t == "assign":
        name, e = r.args
        if name not in sc.pvars:
            raise _err(r, f"undeclared variable {name}")
        return Assign(name, _expr(e, sc))
    if t == "havoc":
        if r.args[0] not in sc.pvars:
            raise _err(r, f"undeclared variable {r.args[0]}")
        return Havoc(r.args[0])
    if t == "assume":
        return Assume(_expr(r.args[0], sc))
    if t == "iter":
        return Iter(_block(r.args[0], sc))
    if t == "if_":
        cond, then, other = r.args
        return If(_expr(cond, sc), _block(then, sc),
                  Skip() if other is None else _block(other, sc))
    if t == "while_":
        return While(_expr(r.args[0], sc), _block(r.args[1], sc))
    if t == "plain_block":
        return _block(r.args[0], sc)
    if t == "choice":
        return Choice(_stmt_or_block(r.args[0], sc), _block(r.args[1], sc))
    raise _err(r, f"unexpected statement {t}")


def _stmt_or_block(r, sc):
    return _block(r, sc) if r.tag == "block" else _stmt(r, sc)


def _block(r, sc):
    return _stmts(r.args[0], sc)


def parse_program(text):
    raw = _parse_raw(text)
    pvars, lvars = {}, {}
    for g in raw.args[:-1]:
        decls = g.args
        target = pvars if g.tag == "pvar_group" else lvars
        for d in decls:
            name, ty = d.args
            if name in target:
                raise _err(d, f"duplicate declaration of {name}")
            target[name] = _type(ty)
    sc = Scope(frozenset(pvars), frozenset(lvars), program=True)
    body = _stmts(raw.args[-1], sc)
    return Program(pvars, lvars, body)


def parse_command(text, pvars):
    raw = _parse_raw(text)
    if len(raw.args) != 1:
        raise SyntaxError_("a bare command cannot carry declarations")
    return _stmts(raw.args[-1], Scope(frozenset(pvars), program=True))


# ---------------------------------------------------------------- printing

_PREC = {"implies": 1, "or": 2, "and": 3, "not": 4, "cmp": 5, "++": 6, "xor": 7,
         "+": 8, "-": 8, "*": 9, "neg": 10, "index": 11, "atom": 12}


def _eprec(e):
    if isinstance(e, Logic):
        return _PREC[e.op]
    if isinstance(e, Not):
        return _PREC["not"]
    if isinstance(e, Compare):
        return _PREC["cmp"]
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Lit) and type(e.value) is int and e.value < 0:
        return _PREC["neg"]
    return _PREC["atom"]


def _wrap(e, need):
    s = expr_str(e)
    return f"({s})" if _eprec(e) < need else s


def expr_str(e):
    if isinstance(e, Lit):
        return V.format_value(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, LVar):
        return f"L.{e.name}"
    if isinstance(e, QVar):
        return e.name
    if isinstance(e, PLook):
        return f"{e.state}[{e.var}]"
    if isinstance(e, LLook):
        return f"{e.state}.L[{e.var}]"
    if isinstance(e, ListLit):
        return "[" + ", ".join(expr_str(x) for x in e.items) + "]"
    if isinstance(e, Call):
        return f"{e.fn}(" + ", ".join(expr_str(x) for x in e.args) + ")"
    if isinstance(e, BinOp):
        if e.op == "index":
            return f"{_wrap(e.left, _PREC['index'])}[{expr_str(e.right)}]"
        p = _PREC[e.op]
        op = e.op
        return f"{_wrap(e.left, p)} {op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Compare):
        p = _PREC["cmp"]
        return f"{_wrap(e.left, p + 1)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Not):
        return f"!{_wrap(e.arg, _PREC['not'])}"
    if isinstance(e, Logic):
        p = _PREC[e.op]
        if e.op == "implies":
            return f"{_wrap(e.args[0], p + 1)} ==> {_wrap(e.args[1], p)}"
        sep = " && " if e.op == "and" else " || "
        return sep.join(_wrap(a, p + 1) for a in e.args)
    raise TypeError(f"not an expression: {e!r}")


def _decl_type(t):
    if isinstance(t, IntType):
        return "int" if t.lo is None else f"int({t.lo}..{t.hi})"
    if isinstance(t, BoolType):
        return "bool"
    return f"list({_decl_type(t.elem)}, maxlen {t.maxlen})"


def type_str(t):
    return _decl_type(t)


def _block_str(c, ind):
    inner = command_str(c, ind + 1)
    pad = "  " * ind
    return "{\n" + inner + "\n" + pad + "}"


def command_str(c, ind=0):
    pad = "  " * ind
    if isinstance(c, Seq):
        first = c.first
        if isinstance(first, Seq):
            head = pad + _block_str(first, ind)
        else:
            head = command_str(first, ind)
        return head + ";\n" + command_str(c.second, ind)
    if isinstance(c, Skip):
        return pad + "skip"
    if isinstance(c, Assign):
        return f"{pad}{c.var} := {expr_str(c.expr)}"
    if isinstance(c, Havoc):
        return f"{pad}havoc {c.var}"
    if isinstance(c, Assume):
        return f"{pad}assume {expr_str(c.cond)}"
    if isinstance(c, Iter):
        return f"{pad}iter {_block_str(c.body, ind)}"
    if isinstance(c, Choice):
        left = c.left
        if isinstance(left, Choice):
            lhs = command_str(left, ind)
        else:
            lhs = pad + _block_str(left, ind)
        return f"{lhs} [] {_block_str(c.right, ind)}"
    if isinstance(c, If):
        s = f"{pad}if ({expr_str(c.cond)}) {_block_str(c.then, ind)}"
        if not isinstance(c.other, Skip):
            s += f" else {_block_str(c.other, ind)}"
        return s
    if isinstance(c, While):
        return f"{pad}while ({expr_str(c.cond)}) {_block_str(c.body, ind)}"
    raise TypeError(f"not a command: {c!r}")


def program_str(p):
    lines = []
    if p.pvars:
        lines.append("vars " + ", ".join(f"{n}:{_decl_type(t)}" for n, t in p.pvars.items()) + ";")
    if p.lvars:
        lines.append("lvars " + ", ".join(f"{n}:{_decl_type(t)}" for n, t in p.lvars.items()) + ";")
    lines.append(command_str(p.body))
    return "\n".join(lines) + "\n"


def _hexpr(e):
    return expr_str(e)


_APREC = {"implies": 1, "otimes": 2, "or": 3, "and": 4, "atom": 9}


def _aprec(a):
    if isinstance(a, (ForallVal, ExistsVal, ForallState, ExistsState, BigOtimesFamily)):
        return 0
    if isinstance(a, Otimes):
        return _APREC["otimes"]
    if isinstance(a, Or):
        return _APREC["or"] if len(a.args) > 1 else _aprec(a.args[0]) if a.args else 9
    if isinstance(a, And):
        return _APREC["and"] if len(a.args) > 1 else _aprec(a.args[0]) if a.args else 9
    if isinstance(a, (Cmp, CardCmp)):
        return 5
    return 9


def _awrap(a, need):
    s = assertion_str(a)
    return f"({s})" if _aprec(a) < need else s


def _cmp_side(e):
    return _wrap(e, _PREC["cmp"] + 1)


def assertion_str(a):
    if isinstance(a, BoolLit):
        return "true" if a.value else "false"
    if isinstance(a, Cmp):
        return f"{_cmp_side(a.left)} {a.op} {_cmp_side(a.right)}"
    if isinstance(a, (And, Or)):
        if not a.args:
            return "true" if isinstance(a, And) else "false"
        if len(a.args) == 1:
            return assertion_str(a.args[0])
        p = _APREC["and"] if isinstance(a, And) else _APREC["or"]
        sep = " && " if isinstance(a, And) else " || "
        return sep.join(_awrap(x, p + 1) for x in a.args)
    if isinstance(a, (ForallVal, ExistsVal)):
        q = "forall" if isinstance(a, ForallVal) else "exists"
        sort = f" : {a.sort}" if a.sort else ""
        return f"{q} {a.name}{sort}. {assertion_str(a.body)}"
    if isinstance(a, (ForallState, ExistsState)):
        q = "forall" if isinstance(a, ForallState) else "exists"
        return f"{q} <{a.name}>. {assertion_str(a.body)}"
    if isinstance(a, Emp):
        return "emp"
    if isinstance(a, Box):
        return f"box({expr_str(a.pred)})"
    if isinstance(a, Low):
        return f"low({expr_str(a.expr)})"
    if isinstance(a, Member):
        ups = [f"L.{x} := {expr_str(e)}" for x, e in a.lupd] + \
              [f"{x} := {expr_str(e)}" for x, e in a.pupd]
        s = f"member({a.state}" + (" with " + ", ".join(ups) if ups else "") + ")"
        return f"!{s}" if a.negated else s
    if isinstance(a, MemberLit):
        st = a.state
        fields = [f"L.{k}: {V.format_value(st.logical[k])}" for k in sorted(st.logical)] + \
                 [f"{k}: {V.format_value(st.program[k])}" for k in sorted(st.program)]
        s = "member({" + ", ".join(fields) + "})"
        return f"!{s}" if a.negated else s
    if isinstance(a, Otimes):
        p = _APREC["otimes"]
        return f"{_awrap(a.left, p)} (+) {_awrap(a.right, p + 1)}"
    if isinstance(a, BigOtimes):
        return f"bigotimes({assertion_str(a.body)})"
    if isinstance(a, BigOtimesFamily):
        sort = f" : {a.sort}" if a.sort else ""
        return f"bigotimes {a.index}{sort}. {assertion_str(a.body)}"
    if isinstance(a, AtMost):
        return f"atmost({assertion_str(a.body)})"
    if isinstance(a, AtLeast):
        return f"atleast({assertion_str(a.body)})"
    if isinstance(a, CardCmp):
        g = "" if a.guard == TRUE else f", {assertion_str(a.guard)}"
        return f"card{{ {expr_str(a.expr)} | {a.state} in S{g} }} {a.op} {_cmp_side(a.bound)}"
    raise TypeError(f"not an assertion: {a!r}")
