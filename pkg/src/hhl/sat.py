"""Satisfaction of hyper-assertions by finite state sets.

Assertions are compiled once into closures ``f(S, env)`` where ``S`` is a
frozenset of :class:`ExtState` and ``env`` a slot-indexed list holding the
current values of state and value binders (rigid parameters included).
"""

from dataclasses import dataclass, field

from . import values as V
from .assertions import (And, AtLeast, AtMost, BigOtimes, BigOtimesFamily, BoolLit,
                         Box, CardCmp, Cmp, Emp, ExistsState, ExistsVal, ForallState,
                         ForallVal, Low, Member, MemberLit, Or, Otimes)
from .lang import LLook, LVar, PLook, QVar, Var, compile_expr
from .semantics import ExtState
from .universe import Universe

OTIMES_CAP = 12


class SatError(Exception):
    """The decision procedure refused the instance (size cap, unbound name)."""


class Undecidable(SatError):
    """A bounded family check changed its answer when the bound was raised."""


@dataclass
class RigidEnv:
    states: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)


def _plook(st, var):
    try:
        return st.program[var]
    except KeyError:
        raise V.EvalError(f"state has no program variable {var}") from None


def _llook(st, var):
    try:
        return st.logical[var]
    except KeyError:
        raise V.EvalError(f"state has no logical variable {var}") from None


def _masks_subset(states, mask):
    return frozenset(states[i] for i in range(len(states)) if mask >> i & 1)


class Compiled:
    """An assertion compiled against a fixed set of rigid names."""

    def __init__(self, assertion, universe=None, rigid_states=(), rigid_values=()):
        self.universe = universe or Universe()
        self.tags = set()
        self._n = 0
        scope = {}
        self.rigid_slots = {}
        for name in rigid_states:
            scope[name] = ("state", self._slot())
            self.rigid_slots[name] = scope[name][1]
        for name in rigid_values:
            scope[name] = ("value", self._slot())
            self.rigid_slots[name] = scope[name][1]
        self.fn = self._compile(assertion, scope)
        self.assertion = assertion

    def _slot(self):
        n = self._n
        self._n += 1
        return n

    def env(self, rigid=None):
        env = [None] * self._n
        if rigid is not None:
            for name, slot in self.rigid_slots.items():
                if name in rigid.states:
                    env[slot] = rigid.states[name]
                elif name in rigid.values:
                    env[slot] = rigid.values[name]
                else:
                    raise SatError(f"rigid name {name} has no value")
        return env

    def __call__(self, states, rigid=None):
        return self.fn(states, self.env(rigid))

    def eval_with(self, states, env):
        return self.fn(states, env)

    # -------------------------------------------------------- expressions

    def _expr(self, e, scope, implicit=None):
        def lookup(name, kind):
            hit = scope.get(name)
            if hit is None or hit[0] != kind:
                raise SatError(f"unbound {kind} name {name}")
            return hit[1]

        def leaf(n):
            if isinstance(n, PLook):
                slot, var = lookup(n.state, "state"), n.var
                return lambda env: _plook(env[slot], var)
            if isinstance(n, LLook):
                slot, var = lookup(n.state, "state"), n.var
                return lambda env: _llook(env[slot], var)
            if isinstance(n, QVar):
                slot = lookup(n.name, "value")
                return lambda env: env[slot]
            if isinstance(n, (Var, LVar)):
                if implicit is None:
                    raise SatError(f"{n.name} needs an implicit state")
                slot, var = implicit, n.name
                if isinstance(n, Var):
                    return lambda env: _plook(env[slot], var)
                return lambda env: _llook(env[slot], var)
            raise SatError(f"unexpected leaf {n!r}")

        return compile_expr(e, leaf)

    def _pred(self, p, scope, slot):
        from .assertions import lift_pred
        name = f"\0implicit{slot}"
        inner = dict(scope)
        inner[name] = ("state", slot)
        return self._compile(lift_pred(p, name), inner)

    # -------------------------------------------------------- assertions

    def _compile(self, a, scope):
        if isinstance(a, BoolLit):
            v = a.value
            return lambda S, env: v
        if isinstance(a, Cmp):
            op = a.op
            l, r = self._expr(a.left, scope), self._expr(a.right, scope)
            if op in ("<=", "<", "=", "!="):
                def cmp(S, env):
                    x, y = l(env), r(env)
                    if type(x) is int and type(y) is int:
                        if op == "<=":
                            return x <= y
                        if op == "<":
                            return x < y
                        if op == "=":
                            return x == y
                        return x != y
                    return V.compare(op, x, y)
                return cmp
            return lambda S, env: V.compare(op, l(env), r(env))
        if isinstance(a, And):
            parts = [self._compile(x, scope) for x in a.args]
            return lambda S, env: all(p(S, env) for p in parts)
        if isinstance(a, Or):
            parts = [self._compile(x, scope) for x in a.args]
            return lambda S, env: any(p(S, env) for p in parts)
        if isinstance(a, (ForallVal, ExistsVal)):
            slot = self._slot()
            dom = self.universe.values_for(a.sort)
            body = self._compile(a.body, {**scope, a.name: ("value", slot)})
            want = isinstance(a, ExistsVal)

            def q(S, env):
                for v in dom:
                    env[slot] = v
                    if body(S, env) == want:
                        return want
                return not want
            return q
        if isinstance(a, (ForallState, ExistsState)):
            slot = self._slot()
            body = self._compile(a.body, {**scope, a.name: ("state", slot)})
            want = isinstance(a, ExistsState)

            def qs(S, env):
                for s in S:
                    env[slot] = s
                    if body(S, env) == want:
                        return want
                return not want
            return qs
        if isinstance(a, Emp):
            return lambda S, env: not S
        if isinstance(a, Box):
            slot = self._slot()
            body = self._pred(a.pred, scope, slot)

            def box(S, env):
                for s in S:
                    env[slot] = s
                    if not body(S, env):
                        return False
                return True
            return box
        if isinstance(a, Low):
            slot = self._slot()
            e = self._expr(a.expr, scope, implicit=slot)

            def low(S, env):
                first = None
                for s in S:
                    env[slot] = s
                    k = V.value_key(e(env))
                    if first is None:
                        first = k
                    elif k != first:
                        return False
                return True
            return low
        if isinstance(a, Member):
            return self._member(a, scope)
        if isinstance(a, MemberLit):
            st, neg = a.state, a.negated
            return lambda S, env: (st in S) != neg
        if isinstance(a, Otimes):
            return self._otimes(a, scope)
        if isinstance(a, BigOtimes):
            body = self._compile(a.body, scope)

            def big(S, env):
                st = list(S)
                if len(st) > OTIMES_CAP:
                    raise SatError(f"set of size {len(st)} exceeds the cover cap {OTIMES_CAP}")
                full = (1 << len(st)) - 1
                acc = 0
                for m in range(full + 1):
                    if m | acc != acc and body(_masks_subset(st, m), env):
                        acc |= m
                        if acc == full:
                            return True
                return acc == full
            return big
        if isinstance(a, BigOtimesFamily):
            return self._family(a, scope)
        if isinstance(a, AtLeast):
            body = self._compile(a.body, scope)

            def atleast(S, env):
                st = list(S)
                if len(st) > OTIMES_CAP:
                    raise SatError(f"set of size {len(st)} exceeds the cover cap {OTIMES_CAP}")
                return any(body(_masks_subset(st, m), env) for m in range(1 << len(st)))
            return atleast
        if isinstance(a, AtMost):
            return self._atmost(a, scope)
        if isinstance(a, CardCmp):
            slot = self._slot()
            inner = {**scope, a.state: ("state", slot)}
            e = self._expr(a.expr, inner)
            guard = self._compile(a.guard, inner)
            bound = self._expr(a.bound, scope)
            op = a.op

            def card(S, env):
                seen = set()
                for s in S:
                    env[slot] = s
                    if guard(S, env):
                        seen.add(V.value_key(e(env)))
                return V.compare(op, len(seen), bound(env))
            return card
        raise SatError(f"cannot evaluate {type(a).__name__}")

    def _member(self, a, scope):
        hit = scope.get(a.state)
        if hit is None or hit[0] != "state":
            raise SatError(f"unbound state name {a.state}")
        slot = hit[1]
        lupd = [(x, self._expr(e, scope)) for x, e in a.lupd]
        pupd = [(x, self._expr(e, scope)) for x, e in a.pupd]
        neg = a.negated
        if not lupd and not pupd:
            return lambda S, env: (env[slot] in S) != neg

        def member(S, env):
            st = env[slot]
            lg, pg = st.logical, st.program
            if lupd:
                lg = lg.update({x: f(env) for x, f in lupd})
            if pupd:
                pg = pg.update({x: f(env) for x, f in pupd})
            return (ExtState(lg, pg) in S) != neg
        return member

    def _otimes(self, a, scope):
        left, right = self._compile(a.left, scope), self._compile(a.right, scope)

        def otimes(S, env):
            st = list(S)
            n = len(st)
            if n > OTIMES_CAP:
                raise SatError(f"set of size {n} exceeds the cover cap {OTIMES_CAP}")
            full = (1 << n) - 1
            memo_r = {}

            def ev_r(m):
                r = memo_r.get(m)
                if r is None:
                    r = memo_r[m] = right(_masks_subset(st, m), env)
                return r

            for m1 in range(full + 1):
                if not left(_masks_subset(st, m1), env):
                    continue
                need = full & ~m1
                t = m1
                while True:
                    if ev_r(need | t):
                        return True
                    if t == 0:
                        break
                    t = (t - 1) & m1
            return False
        return otimes

    def _family(self, a, scope):
        slot = self._slot()
        body = self._compile(a.body, {**scope, a.index: ("value", slot)})
        if a.sort is not None:
            indices = list(self.universe.values_for(a.sort))
            bounded = False
        else:
            indices = list(range(self.universe.max_iter + 2))
            bounded = True

        def decide(S, env, idx):
            st = list(S)
            if len(st) > OTIMES_CAP:
                raise SatError(f"set of size {len(st)} exceeds the cover cap {OTIMES_CAP}")
            full = (1 << len(st)) - 1
            reach = {0}
            for n in idx:
                env[slot] = n
                sats = [m for m in range(full + 1) if body(_masks_subset(st, m), env)]
                if not sats:
                    return False
                reach = {r | m for r in reach for m in sats}
            return full in reach

        def family(S, env):
            if not bounded:
                return decide(S, env, indices)
            self.tags.add("bounded")
            at_n = decide(S, env, indices[:-1])
            if decide(S, env, indices) != at_n:
                raise Undecidable("undecidable at this bound: the indexed union changes "
                                  f"between {indices[-2]} and {indices[-1]} iterations")
            return at_n
        return family

    def _atmost(self, a, scope):
        body = self._compile(a.body, scope)
        grid = None

        def atmost(S, env):
            nonlocal grid
            if body(S, env):
                return True
            self.tags.add("bounded")
            if grid is None:
                try:
                    grid = self.universe.grid()
                except ValueError as exc:
                    raise SatError(f"atmost needs a finite grid: {exc}") from None
            extra = [s for s in grid if s not in S]
            room = max(self.universe.max_card, len(S)) - len(S)
            from itertools import combinations
            for k in range(1, room + 1):
                for add in combinations(extra, k):
                    if body(S | frozenset(add), env):
                        return True
            return False
        return atmost


def compile_assertion(a, universe=None, rigid_states=(), rigid_values=()):
    return Compiled(a, universe, rigid_states, rigid_values)


def sat(states, a, env=None, universe=None):
    """Does the finite state set ``states`` satisfy ``a`` under ``env``?"""
    env = env or RigidEnv()
    c = Compiled(a, universe, tuple(env.states), tuple(env.values))
    return c(frozenset(states), env)


def eval_hexpr(e, env=None, universe=None):
    """Evaluate a closed (under ``env``) hyper-expression."""
    env = env or RigidEnv()
    c = Compiled(BoolLit(True), universe, tuple(env.states), tuple(env.values))
    scope = {n: (("state" if n in env.states else "value"), s) for n, s in c.rigid_slots.items()}
    return c._expr(e, scope)(c.env(env))
