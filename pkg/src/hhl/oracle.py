"""Bounded semantic checks by explicit enumeration of state sets."""

import random
import time
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb

from . import values as V
from .assertions import (And, AtLeast, AtMost, BigOtimes, BigOtimesFamily, BoolLit,
                         CardCmp, Cmp, ExistsState, ExistsVal, ForallState, ForallVal,
                         Member, MemberLit, Or, Otimes, TRUE, FALSE, conj, disj, expand,
                         fresh_name, all_names, fv_log, fv_prog, lift_pred, negate, walk)
from .lang import (Assign, Assume, Choice, Havoc, Iter, LLook, Lit, PLook, Seq, Skip,
                   desugar, expr_pvars, map_expr, read_vars)
from .sat import Compiled, RigidEnv, SatError
from .semantics import ExtState, Interpreter, stateset_to_json


class BudgetExceeded(Exception):
    pass


@dataclass
class Verdict:
    status: str  # "holds" | "refuted" | "unknown"
    universe: object = None
    witness: frozenset = None
    sem_result: frozenset = None
    reason: str = ""
    tags: frozenset = frozenset()
    rigid: dict = None
    checked: int = 0
    elapsed_ms: int = 0

    @property
    def holds(self):
        return self.status == "holds"

    @property
    def refuted(self):
        return self.status == "refuted"

    def label(self):
        return {"holds": "HoldsAtBound", "refuted": "Refuted", "unknown": "Unknown"}[self.status]

    def to_json(self, timing=False):
        out = {"status": self.label()}
        if self.universe is not None:
            out["universe"] = self.universe.describe()
        if self.witness is not None:
            out["witness"] = stateset_to_json(self.witness)
        if self.sem_result is not None:
            out["semResult"] = stateset_to_json(self.sem_result)
        if self.rigid:
            out["rigid"] = {k: (stateset_to_json([v])[0] if isinstance(v, ExtState)
                                else V.to_json(v)) for k, v in sorted(self.rigid.items())}
        if self.reason:
            out["reason"] = self.reason
        if self.tags:
            out["tags"] = sorted(self.tags)
        out["checkedSets"] = self.checked
        if timing:
            out["elapsedMs"] = self.elapsed_ms
        return out


# ---------------------------------------------------------------- relevance

def must_write(c):
    """Variables assigned on every path through a desugared command."""
    if isinstance(c, (Assign, Havoc)):
        return {c.var}
    if isinstance(c, Seq):
        return must_write(c.first) | must_write(c.second)
    if isinstance(c, Choice):
        return must_write(c.left) & must_write(c.right)
    return set()


def exposed_reads(c):
    """Variables whose initial value may be read by a desugared command."""
    if isinstance(c, Assign):
        return expr_pvars(c.expr)
    if isinstance(c, Assume):
        return expr_pvars(c.cond)
    if isinstance(c, Seq):
        return exposed_reads(c.first) | (exposed_reads(c.second) - must_write(c.first))
    if isinstance(c, Choice):
        return exposed_reads(c.left) | exposed_reads(c.right)
    if isinstance(c, Iter):
        return exposed_reads(c.body)
    return set()


def _has_member(*assertions):
    return any(isinstance(n, (Member, MemberLit)) for a in assertions for n in walk(a))


def relevant_vars(u, pre=(), post=(), command=None):
    """(program vars, logical vars) the enumeration grid must vary."""
    pre, post = list(pre), list(post)
    if _has_member(*pre, *post):
        return set(u.all_pvars()), set(u.all_lvars())
    pv, lv = set(), set()
    for a in pre:
        pv |= fv_prog(a)
        lv |= fv_log(a)
    qv = set()
    for a in post:
        qv |= fv_prog(a)
        lv |= fv_log(a)
    if command is None:
        pv |= qv
    else:
        c = desugar(command)
        pv |= exposed_reads(c) | (qv - must_write(c))
    return pv & set(u.all_pvars()), lv & set(u.all_lvars())


# ---------------------------------------------------------------- prefilter

STAR = "\0star"


def prefilter(a):
    """Single-state necessary condition for membership in a satisfying set.

    If ``S`` satisfies ``a`` and ``s`` is in ``S`` then the returned
    assertion holds with the rigid state ``STAR`` bound to ``s``.
    """
    def rn(e, ren):
        if not ren:
            return e

        def leaf(n):
            if isinstance(n, PLook) and n.state in ren:
                return PLook(STAR, n.var)
            if isinstance(n, LLook) and n.state in ren:
                return LLook(STAR, n.var)
            return n
        return map_expr(e, leaf)

    def go(x, ren):
        if isinstance(x, BoolLit):
            return x
        if isinstance(x, Cmp):
            return Cmp(x.op, rn(x.left, ren), rn(x.right, ren))
        if isinstance(x, And):
            return conj(*(go(k, ren) for k in x.args))
        if isinstance(x, Or):
            parts = [go(k, ren) for k in x.args]
            return TRUE if TRUE in parts else disj(*parts)
        if isinstance(x, (ForallVal, ExistsVal)):
            body = go(x.body, ren)
            return body if body in (TRUE, FALSE) else type(x)(x.name, body, x.sort)
        if isinstance(x, ForallState):
            return go(x.body, ren | {x.name})
        if isinstance(x, Otimes):
            return disj(go(x.left, ren), go(x.right, ren))
        if isinstance(x, (BigOtimes, AtMost)):
            return go(x.body, ren)
        return TRUE

    return go(expand(a), frozenset())


# ---------------------------------------------------------------- enumeration

def count_sets(n, max_card):
    return sum(comb(n, k) for k in range(min(n, max_card) + 1))


def candidate_sets(states, u, extra_factor=1):
    """Candidate sets in canonical order (cardinality, then lexicographic)."""
    total = count_sets(len(states), u.max_card) * extra_factor
    if u.mode == "sampled":
        rng = random.Random(u.seed)
        seen = set()
        out = []
        if total <= u.samples:
            for k in range(min(len(states), u.max_card) + 1):
                out.extend(frozenset(c) for c in combinations(states, k))
            return out
        while len(out) < u.samples:
            k = rng.randint(0, min(len(states), u.max_card))
            s = frozenset(rng.sample(states, k))
            if s not in seen:
                seen.add(s)
                out.append(s)
        return out
    if total > u.budget:
        raise BudgetExceeded(f"{total} candidate sets exceed the budget of {u.budget}")
    return (frozenset(c) for k in range(min(len(states), u.max_card) + 1)
            for c in combinations(states, k))


def _rigid_envs(u, grid, rigid_states, rigid_values, hypotheses, value_sorts=None):
    value_sorts = value_sorts or {}
    doms = [grid for _ in rigid_states] + [u.values_for(value_sorts.get(v)) for v in rigid_values]
    for combo in product(*doms):
        env = RigidEnv(dict(zip(rigid_states, combo[:len(rigid_states)])),
                       dict(zip(rigid_values, combo[len(rigid_states):])))
        if all(h.holds(env, u) for h in hypotheses):
            yield env


@dataclass(frozen=True)
class SameLogical:
    """Hypothesis: two rigid states share their logical part."""
    a: str
    b: str

    def holds(self, env, u):
        return env.states[self.a].logical == env.states[self.b].logical

    def describe(self):
        return f"{self.a}.L = {self.b}.L"


@dataclass(frozen=True)
class Reachable:
    """Hypothesis: rigid state ``b`` is a final state of ``command`` from ``a``."""
    a: str
    b: str
    command: object

    def holds(self, env, u):
        src, dst = env.states[self.a], env.states[self.b]
        if src.logical != dst.logical:
            return False
        return dst.program in Interpreter(u.fuel).finals(desugar(self.command), src.program)

    def describe(self):
        return f"{self.b} reachable from {self.a}"


def _rigid_grid(u, grid, pv, lv, assertions, rigid_states, hypotheses):
    """Candidate values for rigid states.

    Rigid states are never changed by a command, so every variable the
    assertions look up is varied; hypotheses that run the command need
    complete states.
    """
    if not rigid_states:
        return grid
    if hypotheses or _has_member(*assertions):
        return u.grid()
    rpv = set(pv)
    for a in assertions:
        rpv |= fv_prog(a)
    return u.grid(rpv & set(u.all_pvars()), lv)


def _filtered(grid, pre, u, rigid_names, env):
    filt = Compiled(prefilter(pre), u, (STAR,) + tuple(env.states), tuple(env.values))
    base = filt.env(RigidEnv({STAR: None, **env.states}, dict(env.values)))
    slot = filt.rigid_slots[STAR]
    out = []
    empty = frozenset()
    for s in grid:
        base[slot] = s
        try:
            ok = filt.eval_with(empty, base)
        except (V.EvalError, SatError):
            ok = True
        if ok:
            out.append(s)
    return out


def _verdict(status, u, start, **kw):
    return Verdict(status, u, elapsed_ms=int((time.perf_counter() - start) * 1000), **kw)


def check_triple(pre, command, post, u, rigid_states=(), rigid_values=(), hypotheses=(),
                 total=False, value_sorts=None):
    """Enumerate candidate initial sets and test the hyper-triple on each."""
    start = time.perf_counter()
    try:
        pv, lv = relevant_vars(u, [pre], [post], command)
        grid = u.grid(pv, lv)
        rgrid = _rigid_grid(u, grid, pv, lv, [pre, post], rigid_states, hypotheses)
        c = desugar(command)
        it = Interpreter(u.fuel)
        cp = Compiled(pre, u, rigid_states, rigid_values)
        cq = Compiled(post, u, rigid_states, rigid_values)
        checked = 0
        finals_cache = {}
        for env in _rigid_envs(u, rgrid, rigid_states, rigid_values, hypotheses, value_sorts):
            states = _filtered(grid, pre, u, rigid_states, env)
            for S in candidate_sets(states, u):
                checked += 1
                if checked > u.budget:
                    raise BudgetExceeded(f"more than {u.budget} candidate sets")
                if not cp(S, env):
                    continue
                out = set()
                stuck = False
                for s in S:
                    fin = finals_cache.get(s.program)
                    if fin is None:
                        fin = finals_cache[s.program] = it.finals(c, s.program)
                    if not fin:
                        stuck = True
                    out.update(s.with_program(p) for p in fin)
                out = frozenset(out)
                tags = {"iteration-bound"} if it.truncated else set()
                if total and stuck:
                    return _verdict("refuted", u, start, witness=S, sem_result=out,
                                    reason="some initial state has no terminating execution",
                                    rigid=_rigid_dict(env), tags=frozenset(tags), checked=checked)
                if not cq(out, env):
                    return _verdict("refuted", u, start, witness=S, sem_result=out,
                                    rigid=_rigid_dict(env), checked=checked,
                                    tags=frozenset(tags | cq.tags | cp.tags))
        tags = set(cp.tags | cq.tags)
        if it.truncated:
            tags.add("iteration-bound")
        if u.mode == "sampled":
            tags.add("sampled")
        return _verdict("holds", u, start, tags=frozenset(tags), checked=checked)
    except BudgetExceeded as exc:
        return _verdict("unknown", u, start, reason=str(exc))
    except (SatError, ValueError) as exc:
        return _verdict("unknown", u, start, reason=str(exc))


def _rigid_dict(env):
    d = dict(env.states)
    d.update(env.values)
    return d or None


def check_total_triple(pre, command, post, u, **kw):
    return check_triple(pre, command, post, u, total=True, **kw)


def check_recurrent_set(region, cond, body, u):
    """Check that the states satisfying ``region`` form a recurrent set of
    ``while (cond) { body }``: every such state satisfies the guard, and one
    guarded iteration from any of them can reach another.

    ``region`` and ``cond`` are state predicates.  A holding verdict on a
    non-empty region means some execution of the loop never terminates.
    """
    start = time.perf_counter()
    name = "r"
    inside = lift_pred(region, name)
    guard = Compiled(ForallState(name, Or((negate(inside), lift_pred(cond, name)))), u)
    pv = (expr_pvars(region) | expr_pvars(cond)) & set(u.all_pvars())
    for s in u.grid(pv):
        if not guard(frozenset([s])):
            return _verdict("refuted", u, start, witness=frozenset([s]),
                            reason="a state of the region violates the loop guard")
    some = ExistsState(name, inside)
    return check_triple(some, Seq(Assume(cond), body), some, u)


_UNIVERSAL = (BoolLit, Cmp, And, Or, ForallVal, ExistsVal, ForallState)


def _downward_closed(a):
    """Syntactic test: every subset of a satisfying set satisfies ``a``."""
    return all(isinstance(n, _UNIVERSAL) for n in walk(expand(a)))


def failure_size(a):
    """Bound on the states needed to witness that ``a`` fails, or None.

    Universal assertions fail because of the states picked by their
    forall-state binders; an existential value binder over such a binder
    can need arbitrarily many, so it is rejected.
    """
    a = expand(a)
    count = 0
    for n in walk(a):
        if not isinstance(n, _UNIVERSAL):
            return None
        if isinstance(n, ExistsVal) and any(isinstance(m, ForallState) for m in walk(n.body)):
            return None
        if isinstance(n, ForallState):
            count += 1
    return count


def check_entailment(p, q, u, rigid_states=(), rigid_values=(), hypotheses=(),
                     value_sorts=None):
    """Bounded check of ``p |= q`` for all rigid instantiations.

    When ``p`` is downward closed and ``q`` fails only on k chosen states,
    sets larger than k cannot be the first counterexample, so enumeration
    stops at k; the verdict is the same as at the full bound.
    """
    start = time.perf_counter()
    full = u
    try:
        k = failure_size(q)
        if k is not None and k < u.max_card and _downward_closed(p):
            u = u.with_(max_card=max(k, 1))
        pv, lv = relevant_vars(u, [p, q])
        grid = u.grid(pv, lv)
        rgrid = _rigid_grid(u, grid, pv, lv, [p, q], rigid_states, hypotheses)
        cp = Compiled(p, u, rigid_states, rigid_values)
        cq = Compiled(q, u, rigid_states, rigid_values)
        checked = 0
        for env in _rigid_envs(u, rgrid, rigid_states, rigid_values, hypotheses, value_sorts):
            states = _filtered(grid, p, u, rigid_states, env)
            for S in candidate_sets(states, u):
                checked += 1
                if checked > u.budget:
                    raise BudgetExceeded(f"more than {u.budget} candidate sets")
                if cp(S, env) and not cq(S, env):
                    return _verdict("refuted", full, start, witness=S, rigid=_rigid_dict(env),
                                    checked=checked, tags=frozenset(cp.tags | cq.tags))
        tags = set(cp.tags | cq.tags)
        if u.mode == "sampled":
            tags.add("sampled")
        return _verdict("holds", full, start, checked=checked, tags=frozenset(tags))
    except (BudgetExceeded, SatError, ValueError) as exc:
        return _verdict("unknown", full, start, reason=str(exc))


# ---------------------------------------------------------------- logical updates

def _relatives(s, lvars, u):
    doms = [u.ldomains[x] for x in lvars]
    out = []
    for combo in product(*doms):
        lg = s.logical.update(dict(zip(lvars, combo)))
        out.append(ExtState(lg, s.program))
    return out


def _v_related_sets(S, lvars, u, cap=1 << 16):
    """All S' with S =^V S' (V given by ``lvars``), smallest first."""
    lvars = sorted(lvars)
    rel = {s: _relatives(s, lvars, u) for s in S}
    closure = sorted({r for rs in rel.values() for r in rs}, key=ExtState.sort_key)
    if (1 << len(closure)) > cap:
        raise BudgetExceeded(f"{len(closure)} related states exceed the relabelling cap")
    for k in range(len(closure) + 1):
        for combo in combinations(closure, k):
            T = frozenset(combo)
            if all(any(r in T for r in rel[s]) for s in S):
                yield T


def check_logical_entailment(p, p2, lvars, u):
    """For every S satisfying ``p``, find S' satisfying ``p2`` with S =^V S'."""
    start = time.perf_counter()
    lvars = set(lvars)
    try:
        missing = [x for x in lvars if x not in u.ldomains]
        if missing:
            raise ValueError(f"no finite domain for logical variable(s) {', '.join(missing)}")
        pv, lv = relevant_vars(u, [p, p2])
        grid = u.grid(pv, lv - lvars)
        cp, cp2 = Compiled(p, u), Compiled(p2, u)
        states = _filtered(grid, p, u, (), RigidEnv())
        checked = 0
        for S in candidate_sets(states, u):
            checked += 1
            if not cp(S):
                continue
            if not any(cp2(T) for T in _v_related_sets(S, lvars, u)):
                return _verdict("refuted", u, start, witness=S, checked=checked,
                                reason="no relabelling of the witness satisfies the target")
        return _verdict("holds", u, start, checked=checked, tags=frozenset(cp.tags | cp2.tags))
    except (BudgetExceeded, SatError, ValueError) as exc:
        return _verdict("unknown", u, start, reason=str(exc))


def check_invariant_on(q, lvars, u):
    """``q`` gives the same answer on all pairs of V-related sets."""
    start = time.perf_counter()
    lvars = set(lvars)
    try:
        missing = [x for x in lvars if x not in u.ldomains]
        if missing:
            raise ValueError(f"no finite domain for logical variable(s) {', '.join(missing)}")
        pv, lv = relevant_vars(u, [q])
        grid = u.grid(pv, lv | lvars)
        cq = Compiled(q, u)
        checked = 0
        for S in candidate_sets(grid, u):
            checked += 1
            want = cq(S)
            for T in _v_related_sets(S, lvars, u):
                if cq(T) != want:
                    return _verdict("refuted", u, start, witness=S, sem_result=T, checked=checked,
                                    reason="two related sets disagree")
        return _verdict("holds", u, start, checked=checked)
    except (BudgetExceeded, SatError, ValueError) as exc:
        return _verdict("unknown", u, start, reason=str(exc))


# ---------------------------------------------------------------- disproving

def describe_state(name, s):
    parts = [Cmp("=", PLook(name, x), Lit(s.program[x])) for x in sorted(s.program)]
    parts += [Cmp("=", LLook(name, x), Lit(s.logical[x])) for x in sorted(s.logical)]
    return conj(*parts)


def describe_set(S):
    """An assertion satisfied by exactly the set ``S``."""
    members = [MemberLit(s) for s in sorted(S, key=ExtState.sort_key)]
    closed = ForallState("p", disj(*(describe_state("p", s)
                                     for s in sorted(S, key=ExtState.sort_key))))
    return conj(*members, closed)


@dataclass
class Disproof:
    verdict: Verdict
    witness: frozenset = None
    strengthened_pre: object = None
    recheck: Verdict = None


def disprove(pre, command, post, u):
    v = check_triple(pre, command, post, u)
    if not v.refuted:
        if v.status == "holds":
            v = Verdict("unknown", u, reason="no witness at bound", checked=v.checked)
        return Disproof(v)
    S = v.witness
    p2 = describe_set(S)
    neg = negate(post)
    if not Compiled(p2, u)(S) or not Compiled(pre, u)(S):
        raise AssertionError("strengthened precondition does not describe the witness")
    grid_u = u.with_(max_card=max(u.max_card, len(S)))
    recheck = check_triple(p2, command, neg, grid_u)
    if not recheck.holds:
        raise AssertionError(f"re-verification failed: {recheck.label()} {recheck.reason}")
    return Disproof(v, S, p2, recheck)


# ---------------------------------------------------------------- sampling helpers

def satisfying_sets(p, u, count_, seed=0, extra_vars=()):
    """Up to ``count_`` distinct sets satisfying ``p``, drawn reproducibly."""
    pv, lv = relevant_vars(u, [p])
    pv |= set(extra_vars) & set(u.pdomains)
    grid = u.grid(pv, lv)
    states = _filtered(grid, p, u, (), RigidEnv())
    cp = Compiled(p, u)
    rng = random.Random(seed)
    total = count_sets(len(states), u.max_card)
    if total <= max(4 * count_, 2000):
        pool = [frozenset(c) for k in range(min(len(states), u.max_card) + 1)
                for c in combinations(states, k)]
        sats = [S for S in pool if cp(S)]
        rng.shuffle(sats)
        return sats[:count_]
    out, seen = [], set()
    attempts = 0
    while len(out) < count_ and attempts < 200 * count_:
        attempts += 1
        k = rng.randint(0, min(len(states), u.max_card))
        S = frozenset(rng.sample(states, k))
        if S in seen:
            continue
        seen.add(S)
        if cp(S):
            out.append(S)
    return out
