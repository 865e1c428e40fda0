"""Big-step semantics with bounded iteration and the lifted set semantics."""

import json
from collections.abc import Mapping
from dataclasses import dataclass, field

from . import values as V
from .lang import (Assign, Assume, Choice, Havoc, If, Iter, Seq, Skip, While,
                   compile_program_expr, desugar)


class Store(Mapping):
    """Immutable variable valuation with kind-aware equality."""

    __slots__ = ("_d", "_hash", "_key")

    def __init__(self, items=()):
        self._d = dict(items)
        self._hash = None
        self._key = None

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def key(self):
        if self._key is None:
            self._key = tuple(sorted((k, V.value_key(v)) for k, v in self._d.items()))
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Store):
            return NotImplemented
        return self is other or (hash(self) == hash(other) and self.key() == other.key())

    def set(self, k, v):
        d = dict(self._d)
        d[k] = v
        return Store(d)

    def update(self, updates):
        d = dict(self._d)
        d.update(updates)
        return Store(d)

    def __repr__(self):
        return "{" + ", ".join(f"{k}: {V.format_value(self._d[k])}" for k in sorted(self._d)) + "}"


class ExtState:
    """A pair of a logical valuation and a program store."""

    __slots__ = ("logical", "program", "_hash")

    def __init__(self, logical, program):
        self.logical = logical if isinstance(logical, Store) else Store(logical)
        self.program = program if isinstance(program, Store) else Store(program)
        self._hash = hash((self.logical, self.program))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, ExtState):
            return NotImplemented
        return self is other or (self._hash == other._hash and self.logical == other.logical
                                 and self.program == other.program)

    def sort_key(self):
        return (self.logical.key(), self.program.key())

    def with_program(self, program):
        return ExtState(self.logical, program)

    def __repr__(self):
        if len(self.logical):
            return f"<L={self.logical!r} P={self.program!r}>"
        return f"<{self.program!r}>"


def canonical(states):
    """Canonical ordering of a state set."""
    return sorted(states, key=ExtState.sort_key)


def stateset_to_json(states):
    out = []
    for s in canonical(states):
        out.append({"logical": {k: V.to_json(s.logical[k]) for k in sorted(s.logical)},
                    "program": {k: V.to_json(s.program[k]) for k in sorted(s.program)}})
    return out


def dumps_stateset(states):
    return json.dumps(stateset_to_json(states), sort_keys=True)


def stateset_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    return frozenset(ExtState({k: V.from_json(v) for k, v in item.get("logical", {}).items()},
                              {k: V.from_json(v) for k, v in item["program"].items()})
                     for item in obj)


@dataclass
class Fuel:
    max_iter: int = 3
    havoc_domain: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")


class Interpreter:
    """Evaluates commands under a fixed fuel; memo tables live per instance.

    ``truncated`` becomes true once some Iter could still reach new states
    after ``max_iter`` unrollings.
    """

    def __init__(self, fuel):
        self.fuel = fuel
        self.truncated = False
        self._memo = {}
        self._compiled = {}

    def _expr(self, e):
        f = self._compiled.get(id(e))
        if f is None:
            f = compile_program_expr(e)
            self._compiled[id(e)] = (f, e)
            return f
        return f[0]

    def finals(self, c, store):
        key = (id(c), store)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[0]
        out = frozenset(self._finals(c, store))
        self._memo[key] = (out, c)
        return out

    def _finals(self, c, store):
        if isinstance(c, Skip):
            return (store,)
        if isinstance(c, Assign):
            try:
                v = self._expr(c.expr)(store)
            except V.EvalError as exc:
                raise V.EvalError(f"{exc} (in state {store!r})") from None
            return (store.set(c.var, v),)
        if isinstance(c, Havoc):
            dom = self.fuel.havoc_domain.get(c.var)
            if dom is None:
                raise ValueError(f"havoc {c.var}: no finite domain declared")
            return tuple(store.set(c.var, v) for v in dom)
        if isinstance(c, Assume):
            try:
                b = V.need_bool(self._expr(c.cond)(store), "assume")
            except V.EvalError as exc:
                raise V.EvalError(f"{exc} (in state {store!r})") from None
            return (store,) if b else ()
        if isinstance(c, Seq):
            out = set()
            for mid in self.finals(c.first, store):
                out |= self.finals(c.second, mid)
            return out
        if isinstance(c, Choice):
            return self.finals(c.left, store) | self.finals(c.right, store)
        if isinstance(c, Iter):
            reached = {store}
            frontier = {store}
            for _ in range(self.fuel.max_iter):
                nxt = set()
                for s in frontier:
                    nxt |= self.finals(c.body, s)
                frontier = nxt - reached
                reached |= frontier
                if not frontier:
                    break
            else:
                if frontier and any(self.finals(c.body, s) - reached for s in frontier):
                    self.truncated = True
            return reached
        if isinstance(c, (If, While)):
            return self.finals(desugar(c), store)
        raise TypeError(f"not a command: {c!r}")

    def sem(self, c, states):
        out = set()
        for s in states:
            for p in self.finals(c, s.program):
                out.add(s.with_program(p))
        return frozenset(out)


def _prepare(c):
    return desugar(c)


def finals(c, store, fuel):
    if not isinstance(store, Store):
        store = Store(store)
    return Interpreter(fuel).finals(_prepare(c), store)


def sem(c, states, fuel):
    return Interpreter(fuel).sem(_prepare(c), states)


def terminates_all(c, states, fuel):
    it = Interpreter(fuel)
    c = _prepare(c)
    return all(it.finals(c, s.program) for s in states)
