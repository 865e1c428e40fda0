"""Rule checkers: validate a proof tree against a program and collect obligations."""

import json
from dataclasses import dataclass, field, replace

from .. import oracle
from ..assertions import (And, AtLeast, AtMost, BigOtimes, BigOtimesFamily, Box, Cmp,
                          EXTENDED, Emp, ExistsState, ExistsVal, FALSE, ForallState,
                          ForallVal, Low, Or, Otimes, TRUE, UnsupportedFragment, alpha_eq,
                          conj, fv_log, fv_prog, lift_expr, normal_form, shape, subst_free,
                          walk)
from ..lang import (Assign, Assume, Choice, Compare, Havoc, If, Iter, LLook, Lit, Logic,
                    LVar, Not, PLook, QVar, Seq, Skip, Var, While, desugar, expr_pvars,
                    flatten_seq, make_seq, wr_vars)
from ..semantics import ExtState
from ..syntax import SyntaxError_, assertion_str, command_str, parse_assertion, parse_hexpr, \
    parse_pred, parse_type
from ..transforms import transform_assign, transform_assume, transform_havoc
from ..universe import Universe
from .. import values as V


class ProofError(Exception):
    """The proof tree does not fit the rules (not a failed obligation)."""


@dataclass
class Judgment:
    pre: object
    post: object
    total: bool = False


@dataclass
class Obligation:
    id: int
    node: int
    kind: str  # "entailment" | "side-condition" | "semantic-premise"
    description: str
    status: str  # "syntactic" | "bounded" | "admitted" | "failed"
    detail: dict = field(default_factory=dict)

    def to_json(self):
        out = {"id": self.id, "node": self.node, "kind": self.kind,
               "description": self.description, "status": self.status}
        out.update(self.detail)
        return out


@dataclass
class Ctx:
    program: object
    universe: Universe
    rigid_states: tuple = ()
    rigid_values: tuple = ()
    value_sorts: dict = field(default_factory=dict)
    hypotheses: tuple = ()

    def parse(self, text):
        if not isinstance(text, str):
            raise ProofError(f"expected an assertion string, got {text!r}")
        try:
            return parse_assertion(text, self.program.pvars, self.program.lvars,
                                   self.rigid_states, self.rigid_values)
        except (SyntaxError_, UnsupportedFragment) as exc:
            raise ProofError(f"in assertion {text!r}: {exc}") from None

    def pred(self, text):
        try:
            return parse_pred(text, self.program.pvars, self.program.lvars,
                              self.rigid_states, self.rigid_values)
        except SyntaxError_ as exc:
            raise ProofError(f"in predicate {text!r}: {exc}") from None

    def hexpr(self, text):
        try:
            return parse_hexpr(text, self.rigid_states, self.rigid_values)
        except SyntaxError_ as exc:
            raise ProofError(f"in expression {text!r}: {exc}") from None

    def with_state(self, *names):
        return replace(self, rigid_states=self.rigid_states + tuple(n for n in names
                                                                    if n not in self.rigid_states))

    def with_value(self, name, sort=None):
        sorts = dict(self.value_sorts)
        if sort is not None:
            sorts[name] = sort
        vals = self.rigid_values if name in self.rigid_values else self.rigid_values + (name,)
        return replace(self, rigid_values=vals, value_sorts=sorts)


GRADES = ["failed", "admitted", "bounded", "syntactic"]

WRAPPERS = {"cons", "exist", "forall", "indexedunion", "framesafe", "frame", "specialize",
            "lupdate", "lupdates", "atmost", "atleast", "bigunion", "linking", "and", "or",
            "union"}

ALIASES = {"assign": "assigns", "havoc": "havocs", "assume": "assumes",
           "whileae": "whileforallexists", "whileforallexist": "whileforallexists",
           "whilee": "whileexists", "whileexist": "whileexists", "exists": "exist",
           "luupdates": "lupdates", "consequence": "cons", "whilesynctotal": "whilesynctot"}


def rule_key(name):
    k = name.lower().replace("-", "").replace("_", "").replace("*", "")
    return ALIASES.get(k, k)


# Number of premises per rule; None means one or more (seq).
ARITY = {
    "skip": 0, "assigns": 0, "havocs": 0, "assumes": 0, "true": 0, "false": 0, "empty": 0,
    "cons": 1, "exist": 1, "forall": 1, "iter": 1, "whilesync": 1, "bigunion": 1,
    "indexedunion": 1, "atmost": 1, "atleast": 1, "framesafe": 1, "frame": 1,
    "specialize": 1, "lupdates": 1, "lupdate": 1, "linking": 1, "whilesynctot": 1,
    "choice": 2, "whiledesugared": 2, "ifsync": 2, "whileforallexists": 2,
    "whileexists": 2, "and": 2, "or": 2, "union": 2, "seq": None,
}


def validate_tree(node):
    """Reject unknown rule names and wrong premise counts before checking."""
    k = rule_key(node.rule)
    if k not in ARITY:
        raise ProofError(f"unknown rule {node.rule!r} at {node.where()}")
    n = ARITY[k]
    if n is None and not node.children:
        raise ProofError(f"{node.rule} at {node.where()} needs at least one premise")
    if n is not None and len(node.children) != n:
        raise ProofError(f"{node.rule} at {node.where()} expects {n} premise(s), "
                         f"got {len(node.children)}")
    for c in node.children:
        validate_tree(c)


def settings_to_universe(u, settings, program=None):
    """Apply ``(universe ...)`` settings to ``u``."""
    pd, ld = dict(u.pdomains), dict(u.ldomains)
    kw = {}
    for name, args in settings:
        if name == "domain":
            var, spec = args
            dom = parse_domain(spec)
            if var.startswith("L."):
                ld[var[2:]] = dom
            else:
                pd[var] = dom
        elif name in ("max-card", "max_card"):
            kw["max_card"] = int(args[0])
        elif name in ("max-iter", "max_iter"):
            kw["max_iter"] = int(args[0])
        elif name == "values":
            kw["value_domain"] = parse_domain(args[0])
        elif name == "budget":
            kw["budget"] = int(args[0])
        elif name == "samples":
            kw["samples"] = int(args[0])
            kw["mode"] = "sampled"
        elif name == "seed":
            kw["seed"] = int(args[0])
        elif name == "mode":
            kw["mode"] = str(args[0])
        else:
            raise ProofError(f"unknown universe setting {name}")
    return u.with_(pdomains=pd, ldomains=ld, **kw)


def parse_domain(spec):
    """``"0..3"``, ``"-2..11"``, ``"{1, 4, 7}"`` or a type such as ``"list(int(0..1), maxlen 2)"``."""
    spec = str(spec).strip()
    if ".." in spec and not spec.startswith(("int", "list")):
        lo, hi = spec.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    if spec.startswith("{") and spec.endswith("}"):
        body = spec[1:-1].strip()
        return tuple(int(x) for x in body.split(",")) if body else ()
    return parse_type(spec).values()


def _conjuncts(nf):
    return set(nf[1:]) if nf[0] == "and" else {nf}


def _disjuncts(nf):
    return set(nf[1:]) if nf[0] == "or" else {nf}


def subsumes(p, q):
    """Cheap syntactic entailment: q's conjuncts among p's, or p's disjuncts among q's."""
    np, nq = normal_form(p), normal_form(q)
    if nq == ("bool", True) or np == ("bool", False):
        return True
    return _conjuncts(nq) <= _conjuncts(np) or _disjuncts(np) <= _disjuncts(nq)


def _box(pred):
    return Box(pred)


def _not(b):
    return Not(b)


class Checker:
    def __init__(self, program, universe):
        self.program = program
        self.universe = universe
        self.nodes = []
        self.obligations = []

    # ------------------------------------------------------------ bookkeeping

    def _oblig(self, nid, kind, desc, status, **detail):
        ob = Obligation(len(self.obligations), nid, kind, desc, status, detail)
        self.obligations.append(ob)
        return ob

    def side(self, nid, desc, ok, why=""):
        self._oblig(nid, "side-condition", desc, "syntactic" if ok else "failed",
                    **({"reason": why} if (why and not ok) else {}))

    def entail(self, nid, node, ctx, p, q, desc="entailment"):
        text = f"{desc}: {assertion_str(p)} |= {assertion_str(q)}"
        rig = {}
        if ctx.rigid_states or ctx.rigid_values:
            rig["rigid"] = list(ctx.rigid_states) + list(ctx.rigid_values)
        if ctx.hypotheses:
            rig["hypotheses"] = [h.describe() for h in ctx.hypotheses]
        if alpha_eq(p, q) or subsumes(p, q):
            return self._oblig(nid, "entailment", text, "syntactic", **rig)
        if node.admit:
            return self._oblig(nid, "entailment", text, "admitted", **rig)
        v = oracle.check_entailment(p, q, ctx.universe, ctx.rigid_states, ctx.rigid_values,
                                    ctx.hypotheses, ctx.value_sorts)
        return self._record(nid, "entailment", text, v, rig)

    def semantic(self, nid, node, desc, run):
        if node.admit:
            return self._oblig(nid, "semantic-premise", desc, "admitted")
        return self._record(nid, "semantic-premise", desc, run(), {})

    def _record(self, nid, kind, text, v, extra):
        if v.holds:
            extra = dict(extra)
            if v.tags:
                extra["tags"] = sorted(v.tags)
            return self._oblig(nid, kind, text, "bounded", universe=v.universe.describe(), **extra)
        detail = dict(extra)
        detail["verdict"] = v.to_json()
        if v.status == "unknown":
            detail["unknown"] = True
        return self._oblig(nid, kind, text, "failed", **detail)

    def same(self, what, computed, given, node, ignore_sorts=False):
        if not alpha_eq(computed, given, ignore_sorts=ignore_sorts):
            raise ProofError(f"{node.rule} at {node.where()}: {what} mismatch\n"
                             f"  computed: {assertion_str(computed)}\n"
                             f"  given:    {assertion_str(given)}")

    # ------------------------------------------------------------ entry

    def width(self, node):
        k = rule_key(node.rule)
        if "width" in node.params:
            return int(node.params["width"])
        if k == "seq":
            return sum(self.width(c) for c in node.children)
        if k in WRAPPERS and node.children:
            return self.width(node.children[0])
        return 1

    def check(self, node, cmd, ctx, pre_hint=None, post_hint=None):
        k = rule_key(node.rule)
        fn = getattr(self, "r_" + k, None)
        if fn is None:
            raise ProofError(f"unknown rule {node.rule!r} at {node.where()}")
        if "universe" in node.params:
            ctx = replace(ctx, universe=settings_to_universe(ctx.universe, node.params["universe"]))
        nid = len(self.nodes)
        entry = {"id": nid, "rule": node.rule, "line": node.line}
        self.nodes.append(entry)
        given_pre = ctx.parse(node.params["pre"]) if "pre" in node.params else None
        given_post = ctx.parse(node.params["post"]) if "post" in node.params else None
        j = fn(node, nid, cmd, ctx,
               given_pre if given_pre is not None else pre_hint,
               given_post if given_post is not None else post_hint,
               given_pre, given_post)
        if k != "cons":
            if given_pre is not None:
                self.same("precondition", j.pre, given_pre, node, ignore_sorts=True)
            if given_post is not None:
                self.same("postcondition", j.post, given_post, node, ignore_sorts=True)
        entry["pre"] = assertion_str(j.pre)
        entry["post"] = assertion_str(j.post)
        if j.total:
            entry["total"] = True
        return j

    def arity(self, node, n):
        if len(node.children) != n:
            raise ProofError(f"{node.rule} at {node.where()} expects {n} premise(s), "
                             f"got {len(node.children)}")

    def need(self, node, what, value):
        if value is None:
            raise ProofError(f"{node.rule} at {node.where()}: cannot determine the {what}; "
                             f"give :{what} explicitly")
        return value

    def param(self, node, key, default=None, required=True):
        if key in node.params:
            return node.params[key]
        if required and default is None:
            raise ProofError(f"{node.rule} at {node.where()} needs :{key}")
        return default

    def expect(self, node, cmd, *types):
        if not isinstance(cmd, types):
            raise ProofError(f"{node.rule} at {node.where()} does not apply to "
                             f"{command_str(cmd).strip().splitlines()[0]!r}")

    # ------------------------------------------------------------ core rules

    def r_skip(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        self.expect(node, cmd, Skip)
        p = post if post is not None else pre
        return Judgment(self.need(node, "post", p), p, True)

    def r_seq(self, node, nid, cmd, ctx, pre, post, gp, gq):
        if not node.children:
            raise ProofError(f"seq at {node.where()} needs premises")
        stmts = flatten_seq(cmd)
        widths = [self.width(c) for c in node.children]
        if sum(widths) != len(stmts):
            raise ProofError(f"seq at {node.where()}: premises cover {sum(widths)} statement(s) "
                             f"but the command has {len(stmts)}")
        cmds, i = [], 0
        for w in widths:
            cmds.append(make_seq(stmts[i:i + w]))
            i += w
        results = [None] * len(node.children)
        hint = post
        for idx in range(len(node.children) - 1, -1, -1):
            j = self.check(node.children[idx], cmds[idx], ctx,
                           pre if idx == 0 else None, hint)
            if idx + 1 < len(node.children):
                nxt = results[idx + 1]
                self.same(f"glue between premises {idx + 1} and {idx + 2}", j.post, nxt.pre,
                          node)
            results[idx] = j
            hint = j.pre
        return Judgment(results[0].pre, results[-1].post, all(r.total for r in results))

    def _branches(self, node, cmd):
        if isinstance(cmd, Choice):
            return cmd.left, cmd.right
        if isinstance(cmd, If):
            return Seq(Assume(cmd.cond), cmd.then), Seq(Assume(_not(cmd.cond)), cmd.other)
        raise ProofError(f"{node.rule} at {node.where()} needs a choice or if statement")

    def r_choice(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 2)
        left, right = self._branches(node, cmd)
        h1 = h2 = None
        if isinstance(post, Otimes):
            h1, h2 = post.left, post.right
        j1 = self.check(node.children[0], left, ctx, pre, h1)
        j2 = self.check(node.children[1], right, ctx, pre, h2)
        self.same("branch preconditions", j1.pre, j2.pre, node)
        return Judgment(j1.pre, Otimes(j1.post, j2.post), j1.total and j2.total)

    def r_cons(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        j = self.check(node.children[0], cmd, ctx, pre, post)
        p = gp if gp is not None else pre if pre is not None else j.pre
        q = gq if gq is not None else post if post is not None else j.post
        self.entail(nid, node, ctx, p, j.pre, "strengthen precondition")
        self.entail(nid, node, ctx, j.post, q, "weaken postcondition")
        return Judgment(p, q, j.total)

    def r_exist(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        v = self.param(node, "v")
        sort = self.param(node, "sort", required=False)
        if v in ctx.rigid_states or v in self.program.pvars:
            raise ProofError(f"exist at {node.where()}: only value binders are supported")
        inner = ctx.with_value(v, sort)
        hp = pre.body if isinstance(pre, ExistsVal) and pre.name == v else None
        hq = post.body if isinstance(post, ExistsVal) and post.name == v else None
        j = self.check(node.children[0], cmd, inner, hp, hq)
        return Judgment(ExistsVal(v, j.pre, sort), ExistsVal(v, j.post, sort), j.total)

    def r_forall(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        v = self.param(node, "v")
        sort = self.param(node, "sort", required=False)
        inner = ctx.with_value(v, sort)
        hp = pre.body if isinstance(pre, ForallVal) and pre.name == v else None
        hq = post.body if isinstance(post, ForallVal) and post.name == v else None
        j = self.check(node.children[0], cmd, inner, hp, hq)
        return Judgment(ForallVal(v, j.pre, sort), ForallVal(v, j.post, sort), j.total)

    def r_iter(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        self.expect(node, cmd, Iter)
        n = self.param(node, "index", "n", required=False)
        inner = ctx.with_value(n, "#nat")
        inv = inner.parse(self.param(node, "inv"))
        step = subst_free(inv, values={n: _plus1(n)})
        child = self.check(node.children[0], cmd.body, inner, inv, step)
        self.same("premise precondition (I_n)", child.pre, inv, node)
        self.same("premise postcondition (I_n+1)", child.post, step, node)
        return Judgment(subst_free(inv, values={n: Lit(0)}), BigOtimesFamily(n, inv))

    # ------------------------------------------------------------ syntactic rules

    def r_assigns(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        self.expect(node, cmd, Assign)
        q = self.need(node, "post", post)
        return Judgment(self._transform(node, lambda: transform_assign(cmd.expr, cmd.var, q)), q, True)

    def r_havocs(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        self.expect(node, cmd, Havoc)
        q = self.need(node, "post", post)
        return Judgment(self._transform(node, lambda: transform_havoc(cmd.var, q)), q, True)

    def r_assumes(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        self.expect(node, cmd, Assume)
        q = self.need(node, "post", post)
        return Judgment(self._transform(node, lambda: transform_assume(cmd.cond, q)), q, False)

    def _transform(self, node, f):
        try:
            return f()
        except UnsupportedFragment as exc:
            raise ProofError(f"{node.rule} at {node.where()}: {exc}") from None

    # ------------------------------------------------------------ loop rules

    def r_whiledesugared(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 2)
        self.expect(node, cmd, While)
        n = self.param(node, "index", "n", required=False)
        inner = ctx.with_value(n, "#nat")
        inv = inner.parse(self.param(node, "inv"))
        step = subst_free(inv, values={n: _plus1(n)})
        j1 = self.check(node.children[0], Seq(Assume(cmd.cond), cmd.body), inner, inv, step)
        self.same("first premise precondition (I_n)", j1.pre, inv, node)
        self.same("first premise postcondition (I_n+1)", j1.post, step, node)
        union = BigOtimesFamily(n, inv)
        j2 = self.check(node.children[1], Assume(_not(cmd.cond)), ctx, union, post)
        self.same("second premise precondition", j2.pre, union, node)
        return Judgment(subst_free(inv, values={n: Lit(0)}), j2.post)

    def r_whilesync(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        self.expect(node, cmd, While)
        inv = ctx.parse(self.param(node, "inv"))
        self.entail(nid, node, ctx, inv, Low(cmd.cond), "guard is low")
        body_pre = conj(inv, _box(cmd.cond))
        j = self.check(node.children[0], cmd.body, ctx, body_pre, inv)
        self.same("body precondition", j.pre, body_pre, node)
        self.same("body postcondition", j.post, inv, node)
        return Judgment(inv, And((Or((inv, Emp())), _box(_not(cmd.cond)))))

    def r_ifsync(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 2)
        self.expect(node, cmd, If)
        p = self.need(node, "pre", pre)
        self.entail(nid, node, ctx, p, Low(cmd.cond), "guard is low")
        p1, p2 = conj(p, _box(cmd.cond)), conj(p, _box(_not(cmd.cond)))
        j1 = self.check(node.children[0], cmd.then, ctx, p1, post)
        q = post if post is not None else j1.post
        j2 = self.check(node.children[1], cmd.other, ctx, p2, q)
        self.same("then-branch precondition", j1.pre, p1, node)
        self.same("else-branch precondition", j2.pre, p2, node)
        self.same("then-branch postcondition", j1.post, q, node)
        self.same("else-branch postcondition", j2.post, q, node)
        return Judgment(p, q, j1.total and j2.total)

    def r_whileforallexists(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 2)
        self.expect(node, cmd, While)
        inv = ctx.parse(self.param(node, "inv"))
        j1 = self.check(node.children[0], If(cmd.cond, cmd.body, Skip()), ctx, inv, inv)
        self.same("loop-body premise precondition", j1.pre, inv, node)
        self.same("loop-body premise postcondition", j1.post, inv, node)
        j2 = self.check(node.children[1], Assume(_not(cmd.cond)), ctx, inv, post)
        self.same("exit premise precondition", j2.pre, inv, node)
        sh = shape(j2.post)
        self.side(nid, "no forall-state after an existential in the postcondition",
                  not sh.forall_after_exists, "postcondition has a forall-state under an existential")
        return Judgment(inv, j2.post)

    def r_whileexists(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 2)
        self.expect(node, cmd, While)
        phi = self.param(node, "phi", "phi", required=False)
        v = self.param(node, "v", "v", required=False)
        vsort = self.param(node, "vsort", required=False)
        with_phi = ctx.with_state(phi)
        p_phi = with_phi.parse(self.param(node, "p"))
        q_phi = with_phi.parse(self.param(node, "q"))
        variant = with_phi.hexpr(self.param(node, "variant"))
        b_phi = _lift_assertion(cmd.cond, phi)
        with_v = ctx.with_value(v, vsort)
        pre1 = ExistsState(phi, conj(p_phi, b_phi, Cmp("=", QVar(v), variant)))
        post1 = ExistsState(phi, conj(p_phi, Cmp("<=", Lit(0), variant), Cmp("<", variant, QVar(v))))
        self._clash(node, v, [p_phi, q_phi])
        j1 = self.check(node.children[0], If(cmd.cond, cmd.body, Skip()), with_v, pre1, post1)
        self.same("variant premise precondition", j1.pre, pre1, node)
        self.same("variant premise postcondition", j1.post, post1, node)
        j2 = self.check(node.children[1], cmd, with_phi, p_phi, q_phi)
        self.same("rigid premise precondition", j2.pre, p_phi, node)
        self.same("rigid premise postcondition", j2.post, q_phi, node)
        return Judgment(ExistsState(phi, p_phi), ExistsState(phi, q_phi))

    def _clash(self, node, name, assertions):
        from ..assertions import free_refs
        for a in assertions:
            if name in free_refs(a)[1]:
                raise ProofError(f"{node.rule} at {node.where()}: rigid {name} must not occur "
                                 f"free in the invariant family")

    # ------------------------------------------------------------ compositionality

    def _pair(self, node, cmd, ctx, pre, post, split):
        self.arity(node, 2)
        hp = split(pre)
        hq = split(post)
        j1 = self.check(node.children[0], cmd, ctx, hp[0], hq[0])
        j2 = self.check(node.children[1], cmd, ctx, hp[1], hq[1])
        return j1, j2

    def r_and(self, node, nid, cmd, ctx, pre, post, gp, gq):
        sp = lambda a: (a.args[0], conj(*a.args[1:])) if isinstance(a, And) and len(a.args) >= 2 else (None, None)
        j1, j2 = self._pair(node, cmd, ctx, pre, post, sp)
        return Judgment(And((j1.pre, j2.pre)), And((j1.post, j2.post)), j1.total and j2.total)

    def r_or(self, node, nid, cmd, ctx, pre, post, gp, gq):
        sp = lambda a: (a.args[0], Or(a.args[1:]) if len(a.args) > 2 else a.args[1]) \
            if isinstance(a, Or) and len(a.args) >= 2 else (None, None)
        j1, j2 = self._pair(node, cmd, ctx, pre, post, sp)
        return Judgment(Or((j1.pre, j2.pre)), Or((j1.post, j2.post)), j1.total and j2.total)

    def r_union(self, node, nid, cmd, ctx, pre, post, gp, gq):
        sp = lambda a: (a.left, a.right) if isinstance(a, Otimes) else (None, None)
        j1, j2 = self._pair(node, cmd, ctx, pre, post, sp)
        return Judgment(Otimes(j1.pre, j2.pre), Otimes(j1.post, j2.post), j1.total and j2.total)

    def r_bigunion(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        hp = pre.body if isinstance(pre, BigOtimes) else None
        hq = post.body if isinstance(post, BigOtimes) else None
        j = self.check(node.children[0], cmd, ctx, hp, hq)
        return Judgment(BigOtimes(j.pre), BigOtimes(j.post), j.total)

    def r_indexedunion(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        x = self.param(node, "index", "x", required=False)
        sort = self.param(node, "sort", required=False)
        inner = ctx.with_value(x, sort if sort is not None else "#nat")
        hp = pre.body if isinstance(pre, BigOtimesFamily) and pre.index == x else None
        hq = post.body if isinstance(post, BigOtimesFamily) and post.index == x else None
        j = self.check(node.children[0], cmd, inner, hp, hq)
        return Judgment(BigOtimesFamily(x, j.pre, sort), BigOtimesFamily(x, j.post, sort), j.total)

    def r_atmost(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        hp = pre.body if isinstance(pre, AtMost) else None
        hq = post.body if isinstance(post, AtMost) else None
        j = self.check(node.children[0], cmd, ctx, hp, hq)
        return Judgment(AtMost(j.pre), AtMost(j.post))

    def r_atleast(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        hp = pre.body if isinstance(pre, AtLeast) else None
        hq = post.body if isinstance(post, AtLeast) else None
        j = self.check(node.children[0], cmd, ctx, hp, hq)
        return Judgment(AtLeast(j.pre), AtLeast(j.post))

    def r_true(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        return Judgment(self.need(node, "pre", pre), TRUE)

    def r_false(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        return Judgment(FALSE, self.need(node, "post", post), True)

    def r_empty(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 0)
        return Judgment(Emp(), Emp(), True)

    def r_framesafe(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        frame = ctx.parse(self.param(node, "frame"))
        sh = shape(frame)
        self.side(nid, "frame has no exists-state quantifier", not sh.exists_state,
                  "frame contains an exists-state quantifier")
        clash = wr_vars(cmd) & fv_prog(frame)
        self.side(nid, "frame reads no variable written by the command", not clash,
                  f"written and framed: {', '.join(sorted(clash))}")
        hp = _strip_frame(pre, frame)
        hq = _strip_frame(post, frame)
        j = self.check(node.children[0], cmd, ctx, hp, hq)
        return Judgment(And((j.pre, frame)), And((j.post, frame)), j.total)

    def r_frame(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        frame = ctx.parse(self.param(node, "frame"))
        syntactic = not any(isinstance(n, EXTENDED) for n in walk(frame))
        self.side(nid, "frame is a syntactic hyper-assertion", syntactic,
                  "frame uses operators outside the syntactic fragment")
        clash = wr_vars(cmd) & fv_prog(frame)
        self.side(nid, "frame reads no variable written by the command", not clash,
                  f"written and framed: {', '.join(sorted(clash))}")
        j = self.check(node.children[0], cmd, ctx, _strip_frame(pre, frame),
                       _strip_frame(post, frame))
        self._termination(nid, node, cmd, ctx, j)
        return Judgment(And((j.pre, frame)), And((j.post, frame)), True)

    def _termination(self, nid, node, cmd, ctx, j):
        if j.total:
            return
        if not _has_assume(desugar(cmd)):
            self.side(nid, "assume-free command: total and ordinary triples coincide", True)
            return
        desc = f"termination: every state of a set satisfying {assertion_str(j.pre)} has a terminating run"
        self.semantic(nid, node, desc, lambda: oracle.check_total_triple(
            j.pre, cmd, TRUE, ctx.universe, rigid_states=ctx.rigid_states,
            rigid_values=ctx.rigid_values, hypotheses=ctx.hypotheses, value_sorts=ctx.value_sorts))

    def r_specialize(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        b = ctx.pred(self.param(node, "b"))
        clash = wr_vars(cmd) & expr_pvars(b)
        self.side(nid, "specialisation predicate reads no written variable", not clash,
                  f"written and read: {', '.join(sorted(clash))}")
        p_req = self.param(node, "p", required=False)
        q_req = self.param(node, "q", required=False)
        hp = ctx.parse(p_req) if p_req else None
        hq = ctx.parse(q_req) if q_req else None
        j = self.check(node.children[0], cmd, ctx, hp, hq)
        try:
            return Judgment(transform_assume(b, j.pre), transform_assume(b, j.post), j.total)
        except UnsupportedFragment as exc:
            raise ProofError(f"specialize at {node.where()}: {exc}") from None

    def r_lupdates(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        p = self.need(node, "pre", pre)
        ups = self.param(node, "updates")
        if ups and isinstance(ups[0], str):
            ups = [ups]
        pairs = []
        for item in ups:
            t, e = item
            t = t[2:] if t.startswith("L.") else t
            pairs.append((t, ctx.pred(e)))
        name = "s"
        from ..assertions import all_names, fresh_name
        name = fresh_name("s", all_names(p) | set(ctx.rigid_states) | set(ctx.rigid_values))
        upd = ForallState(name, conj(*(Cmp("=", LLook(name, t), lift_expr(e, name)) for t, e in pairs)))
        child_pre = conj(p, upd)
        j = self.check(node.children[0], cmd, ctx, child_pre, post)
        self.same("premise precondition", j.pre, child_pre, node)
        q = j.post
        for t, e in pairs:
            bad = t in fv_log(p) or t in fv_log(q) or any(t in _lvars_of(e2) for _, e2 in pairs)
            self.side(nid, f"logical variable {t} is fresh", not bad,
                      f"{t} occurs in the pre, the post or an update expression")
        return Judgment(p, q, j.total)

    def r_lupdate(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        p = self.need(node, "pre", pre)
        lv = self.param(node, "vars")
        lv = [lv] if isinstance(lv, str) else list(lv)
        lv = [x[2:] if x.startswith("L.") else x for x in lv]
        p2 = ctx.parse(self.param(node, "p"))
        j = self.check(node.children[0], cmd, ctx, p2, post)
        self.same("premise precondition", j.pre, p2, node)
        u = ctx.universe
        self.semantic(nid, node, f"logical update over {{{', '.join(lv)}}}: "
                                 f"{assertion_str(p)} => {assertion_str(p2)}",
                      lambda: oracle.check_logical_entailment(p, p2, lv, u))
        self.semantic(nid, node, f"invariant under updates of {{{', '.join(lv)}}}: "
                                 f"{assertion_str(j.post)}",
                      lambda: oracle.check_invariant_on(j.post, lv, u))
        return Judgment(p, j.post, j.total)

    def r_linking(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        p1 = self.param(node, "phi1", "phi1", required=False)
        p2 = self.param(node, "phi2", "phi2", required=False)
        inner = ctx.with_state(p1, p2)
        pfam = ctx.with_state(p1).parse(self.param(node, "p"))
        qfam = ctx.with_state(p2).parse(self.param(node, "q"))
        inner = replace(inner, hypotheses=ctx.hypotheses + (oracle.SameLogical(p1, p2),
                                                            oracle.Reachable(p1, p2, cmd)))
        j = self.check(node.children[0], cmd, inner, pfam, qfam)
        self.same("premise precondition", j.pre, pfam, node)
        self.same("premise postcondition", j.post, qfam, node)
        return Judgment(ForallState(p1, pfam), ForallState(p2, qfam))

    def r_whilesynctot(self, node, nid, cmd, ctx, pre, post, gp, gq):
        self.arity(node, 1)
        self.expect(node, cmd, While)
        inv = ctx.parse(self.param(node, "inv"))
        variant = ctx.pred(self.param(node, "variant"))
        t = self.param(node, "t", "t", required=False)
        t = t[2:] if t.startswith("L.") else t
        self.side(nid, f"snapshot variable {t} is not free in the invariant", t not in fv_log(inv),
                  f"{t} occurs in the invariant")
        snap = LVar(t)
        body_pre = conj(inv, _box(Logic("and", (cmd.cond, Compare("=", variant, snap)))))
        body_post = conj(inv, Low(cmd.cond),
                         _box(Logic("and", (Compare("<=", Lit(0), variant),
                                            Compare("<", variant, snap)))))
        j = self.check(node.children[0], cmd.body, ctx, body_pre, body_post)
        self.same("body precondition", j.pre, body_pre, node)
        self.same("body postcondition", j.post, body_post, node)
        self._termination(nid, node, cmd.body, ctx, j)
        return Judgment(conj(inv, Low(cmd.cond)), conj(inv, _box(_not(cmd.cond))), True)


def _plus1(n):
    from ..lang import BinOp
    return BinOp("+", QVar(n), Lit(1))


def _lift_assertion(b, phi):
    from ..assertions import lift_pred
    return lift_pred(b, phi)


def _strip_frame(a, frame):
    if isinstance(a, And) and len(a.args) >= 2 and alpha_eq(a.args[-1], frame):
        return conj(*a.args[:-1])
    return None


def _has_assume(c):
    if isinstance(c, Assume):
        return True
    from ..lang import sub_commands
    return any(_has_assume(s) for s in sub_commands(c))


def _lvars_of(e):
    from ..lang import leaves
    return {x.name for x in leaves(e) if isinstance(x, LVar)} | \
           {x.var for x in leaves(e) if isinstance(x, LLook)}


@dataclass
class Report:
    accepted: bool
    grade: str
    nodes: list
    obligations: list
    errors: list
    universe: Universe = None
    pre: object = None
    post: object = None

    @property
    def unknown(self):
        return any(o.status == "failed" and o.detail.get("unknown") for o in self.obligations)

    def counts(self):
        out = {g: 0 for g in GRADES}
        for o in self.obligations:
            out[o.status] += 1
        return out

    def to_json(self):
        return {
            "accepted": self.accepted,
            "grade": self.grade,
            "pre": assertion_str(self.pre) if self.pre is not None else None,
            "post": assertion_str(self.post) if self.post is not None else None,
            "universe": self.universe.describe() if self.universe is not None else None,
            "counts": self.counts(),
            "nodes": self.nodes,
            "obligations": [o.to_json() for o in self.obligations],
            "errors": self.errors,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def overall_grade(obligations):
    if not obligations:
        return "syntactic"
    return min((o.status for o in obligations), key=GRADES.index)


def check_proof(program, script, universe, pre=None, post=None):
    """Check ``script`` (a ProofScript or ProofNode) against ``program.body``.

    ``pre``/``post``, when given, must match the conclusion of the root node.
    Structural problems are reported as errors and make the proof rejected.
    """
    root = getattr(script, "root", script)
    settings = getattr(script, "universe", None) or []
    u = settings_to_universe(universe, settings) if settings else universe
    checker = Checker(program, u)
    ctx = Ctx(program, u)
    errors = []
    j = None
    try:
        j = checker.check(root, program.body, ctx, pre, post)
        if pre is not None:
            checker.same("precondition of the claimed triple", j.pre, pre, root, ignore_sorts=True)
        if post is not None:
            checker.same("postcondition of the claimed triple", j.post, post, root, ignore_sorts=True)
    except ProofError as exc:
        errors.append(str(exc))
    grade = "failed" if errors else overall_grade(checker.obligations)
    return Report(accepted=grade != "failed", grade=grade, nodes=checker.nodes,
                  obligations=checker.obligations, errors=errors, universe=u,
                  pre=j.pre if j else None, post=j.post if j else None)
