"""Proof scripts: s-expressions, one form per proof node.

    (define NAME "assertion text")        ; reusable text, referenced as NAME or $NAME
    (universe (domain x "0..3") (max-card 2) (max-iter 5) (values "0..9"))
    (cons :pre "..." :post "..." (seq (assigns) (havocs)))
"""

import re
from dataclasses import dataclass, field

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput

from .rules import ProofError, validate_tree

SEXP_GRAMMAR = r"""
start: item*
?item: sexp | KEYWORD -> keyword | STRING -> string | NUMBER -> number | SYMBOL -> symbol
sexp: "(" item* ")"
KEYWORD: /:[A-Za-z_][A-Za-z0-9_\-]*/
STRING: /"(\\.|[^"\\])*"/s
NUMBER: /-?[0-9]+(?![A-Za-z_])/
SYMBOL: /[^\s()":;][^\s()";]*/
COMMENT: /;[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
"""

_sexp = Lark(SEXP_GRAMMAR, parser="lalr", propagate_positions=True)

FLAGS = {"admit"}


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Kw:
    name: str


@dataclass
class SList:
    items: list
    line: int = 0
    column: int = 0


class _Build(Transformer):
    def start(self, items):
        return list(items)

    def sexp(self, meta_items):
        return SList(list(meta_items))

    def keyword(self, t):
        return Kw(str(t[0])[1:])

    def string(self, t):
        s = str(t[0])[1:-1]
        return bytes(s, "utf-8").decode("unicode_escape") if "\\" in s else s

    def number(self, t):
        return int(t[0])

    def symbol(self, t):
        return Sym(str(t[0]))


def _positions(tree, built):
    """Attach line/column info from the lark tree to the SList objects."""
    from lark import Tree
    stack = [(tree, built)]
    while stack:
        t, b = stack.pop()
        if isinstance(t, Tree) and isinstance(b, SList):
            b.line, b.column = t.meta.line, t.meta.column
            kids = [c for c in t.children]
            for tc, bc in zip(kids, b.items):
                stack.append((tc, bc))
        elif isinstance(t, Tree) and isinstance(b, list):
            for tc, bc in zip(t.children, b):
                stack.append((tc, bc))


def read_sexps(text):
    try:
        tree = _sexp.parse(text)
    except UnexpectedInput as exc:
        raise ScriptError(f"script syntax error at line {exc.line}, column {exc.column}") from None
    built = _Build().transform(tree)
    _positions(tree, built)
    return built


@dataclass
class ProofNode:
    rule: str
    params: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    admit: bool = False
    line: int = 0
    column: int = 0

    def size(self):
        return 1 + sum(c.size() for c in self.children)

    def where(self):
        return f"line {self.line}, column {self.column}" if self.line else "?"


@dataclass
class ProofScript:
    root: ProofNode
    defines: dict = field(default_factory=dict)
    universe: list = field(default_factory=list)  # raw (name, args) settings


def _substitute(text, defines):
    def rep(m):
        name = m.group(1)
        if name not in defines:
            raise ScriptError(f"undefined ${name}")
        return "(" + defines[name] + ")"
    return re.sub(r"\$([A-Za-z_][A-Za-z0-9_]*)", rep, text)


def _value(v, defines):
    if isinstance(v, str):
        return _substitute(v, defines)
    if isinstance(v, Sym):
        if v.name in defines:
            return defines[v.name]
        return v.name
    if isinstance(v, SList):
        return [_value(x, defines) for x in v.items]
    return v


def _node(form, defines):
    if not isinstance(form, SList) or not form.items or not isinstance(form.items[0], Sym):
        raise ScriptError(f"line {getattr(form, 'line', '?')}: a proof node must start with a rule name")
    rule = form.items[0].name
    node = ProofNode(rule, line=form.line, column=form.column)
    items = form.items[1:]
    i = 0
    while i < len(items):
        it = items[i]
        if isinstance(it, Kw):
            key = it.name.replace("-", "_")
            if key in FLAGS:
                node.admit = True
                i += 1
                continue
            if i + 1 >= len(items):
                raise ScriptError(f"line {form.line}: :{it.name} needs a value")
            val = items[i + 1]
            if key == "universe":
                node.params[key] = _settings(val)
            else:
                node.params[key] = _value(val, defines)
            i += 2
            continue
        if isinstance(it, SList):
            node.children.append(_node(it, defines))
            i += 1
            continue
        raise ScriptError(f"line {form.line}: unexpected {it!r} in proof node")
    return node


def _settings(form):
    if not isinstance(form, SList):
        raise ScriptError("universe settings must be a list")
    items = form.items
    if items and isinstance(items[0], Sym) and items[0].name == "universe":
        items = items[1:]
    out = []
    for s in items:
        if not isinstance(s, SList) or not s.items or not isinstance(s.items[0], Sym):
            raise ScriptError(f"bad universe setting {s!r}")
        out.append((s.items[0].name, [x.name if isinstance(x, Sym) else x for x in s.items[1:]]))
    return out


def parse_proof_script(text):
    forms = read_sexps(text)
    defines, universe, roots = {}, [], []
    for f in forms:
        if not isinstance(f, SList) or not f.items or not isinstance(f.items[0], Sym):
            raise ScriptError("top-level items must be forms")
        head = f.items[0].name
        if head == "define":
            if len(f.items) != 3 or not isinstance(f.items[1], Sym) or not isinstance(f.items[2], str):
                raise ScriptError(f"line {f.line}: (define NAME \"text\") expected")
            defines[f.items[1].name] = _substitute(f.items[2], defines)
        elif head == "universe":
            universe.extend(_settings(f))
        else:
            roots.append(_node(f, defines))
    if len(roots) != 1:
        raise ScriptError(f"expected exactly one proof tree, found {len(roots)}")
    try:
        validate_tree(roots[0])
    except ProofError as exc:
        raise ScriptError(str(exc)) from None
    return ProofScript(roots[0], defines, universe)
