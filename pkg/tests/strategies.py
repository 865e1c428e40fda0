"""Hypothesis strategies shared by the property suites.

Commands and assertions are generated as concrete syntax and parsed, so
every property test also exercises the parser.
"""

from pathlib import Path

from hypothesis import strategies as st

from hhl.semantics import ExtState, Fuel
from hhl.syntax import parse_assertion, parse_command, parse_expr
from hhl.universe import Universe

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

PVARS = ("x", "y")
DOM3 = (0, 1, 2)
DOM2 = (0, 1)


def universe3(max_card=4, max_iter=3, **kw):
    return Universe(pdomains={"x": DOM3, "y": DOM3}, value_domain=DOM3,
                    max_card=max_card, max_iter=max_iter, **kw)


def universe2(max_card=3, max_iter=2, **kw):
    return Universe(pdomains={"x": DOM2, "y": DOM2}, value_domain=DOM2,
                    max_card=max_card, max_iter=max_iter, **kw)


def fuel_for(dom, max_iter):
    return Fuel(max_iter, {x: dom for x in PVARS})


# ---------------------------------------------------------------- program text

@st.composite
def expr_text(draw, dom=DOM3, pvars=PVARS):
    """Integer expressions whose value stays inside ``dom`` on ``dom`` states."""
    top = dom[-1]
    v, w = draw(st.sampled_from(pvars)), draw(st.sampled_from(pvars))
    return draw(st.sampled_from([
        str(draw(st.sampled_from(dom))),
        v,
        f"{top} - {v}",
        f"max({v}, {w})",
        f"min({v}, {w})",
    ]))


@st.composite
def cond_text(draw, dom=DOM3, pvars=PVARS):
    v = draw(st.sampled_from(pvars))
    op = draw(st.sampled_from(["=", "!=", "<", "<=", ">", ">="]))
    rhs = draw(st.one_of(st.sampled_from(pvars), st.sampled_from([str(c) for c in dom])))
    atom = f"{v} {op} {rhs}"
    shape = draw(st.integers(0, 3))
    if shape == 0:
        return atom
    if shape == 1:
        return f"!({atom})"
    other = f"{draw(st.sampled_from(pvars))} = {draw(st.sampled_from(dom))}"
    return f"{atom} {'&&' if shape == 2 else '||'} {other}"


@st.composite
def command_text(draw, depth=4, dom=DOM3, loops=True, pvars=PVARS):
    if depth <= 1:
        kind = draw(st.sampled_from(["skip", "assign", "havoc", "assume"]))
    else:
        kinds = ["skip", "assign", "havoc", "assume", "seq", "choice", "if"]
        if loops:
            kinds += ["iter", "while"]
        kind = draw(st.sampled_from(kinds))
    if kind == "skip":
        return "skip"
    if kind == "assign":
        return f"{draw(st.sampled_from(pvars))} := {draw(expr_text(dom, pvars))}"
    if kind == "havoc":
        return f"havoc {draw(st.sampled_from(pvars))}"
    if kind == "assume":
        return f"assume {draw(cond_text(dom, pvars))}"
    sub = command_text(depth - 1, dom, loops, pvars)
    if kind == "seq":
        return f"{draw(sub)}; {draw(sub)}"
    if kind == "choice":
        return f"{{ {draw(sub)} }} [] {{ {draw(sub)} }}"
    if kind == "if":
        return f"if ({draw(cond_text(dom, pvars))}) {{ {draw(sub)} }} else {{ {draw(sub)} }}"
    if kind == "iter":
        return f"iter {{ {draw(sub)} }}"
    return f"while ({draw(cond_text(dom, pvars))}) {{ {draw(sub)} }}"


def commands(depth=4, dom=DOM3, loops=True, pvars=PVARS):
    return command_text(depth, dom, loops, pvars).map(lambda t: parse_command(t, pvars))


def exprs(dom=DOM3):
    return expr_text(dom).map(lambda t: parse_expr(t, PVARS))


def preds(dom=DOM3):
    return cond_text(dom).map(lambda t: parse_expr(t, PVARS))


# ---------------------------------------------------------------- state sets

def states(dom=DOM3, lvals=(0, 1)):
    return st.builds(lambda x, y, t: ExtState({"t": t}, {"x": x, "y": y}),
                     st.sampled_from(dom), st.sampled_from(dom), st.sampled_from(lvals))


def state_sets(dom=DOM3, max_size=4, lvals=(0, 1)):
    return st.frozensets(states(dom, lvals), max_size=max_size)


# ---------------------------------------------------------------- assertions

@st.composite
def hexpr_text(draw, bound_states, bound_vals, dom=DOM3):
    options = [str(draw(st.sampled_from(dom)))]
    for p in bound_states:
        options += [f"{p}[x]", f"{p}[y]", f"{p}[x] + {p}[y]"]
    options += list(bound_vals)
    return draw(st.sampled_from(options))


@st.composite
def assertion_text(draw, depth=3, bound_states=(), bound_vals=(), dom=DOM3):
    """Closed hyper-assertions from the first-order fragment."""
    kinds = ["cmp", "cmp", "bool"]
    if depth > 0:
        kinds += ["and", "or", "fa_state", "ex_state", "fa_state", "ex_state", "fa_val", "ex_val"]
    kind = draw(st.sampled_from(kinds))
    if kind == "bool":
        return draw(st.sampled_from(["true", "false"]))
    if kind == "cmp":
        a = draw(hexpr_text(bound_states, bound_vals, dom))
        b = draw(hexpr_text(bound_states, bound_vals, dom))
        return f"{a} {draw(st.sampled_from(['=', '!=', '<', '<=']))} {b}"
    if kind in ("and", "or"):
        left = draw(assertion_text(depth - 1, bound_states, bound_vals, dom))
        right = draw(assertion_text(depth - 1, bound_states, bound_vals, dom))
        return f"({left}) {'&&' if kind == 'and' else '||'} ({right})"
    if kind in ("fa_state", "ex_state"):
        name = f"p{len(bound_states)}"
        body = draw(assertion_text(depth - 1, bound_states + (name,), bound_vals, dom))
        q = "forall" if kind == "fa_state" else "exists"
        return f"{q} <{name}>. ({body})"
    name = f"v{len(bound_vals)}"
    body = draw(assertion_text(depth - 1, bound_states, bound_vals + (name,), dom))
    q = "forall" if kind == "fa_val" else "exists"
    return f"{q} {name}. ({body})"


def assertions(depth=3, dom=DOM3):
    return assertion_text(depth, dom=dom).map(lambda t: parse_assertion(t, PVARS))
