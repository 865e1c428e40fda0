"""Finite domains and bounds that make semantic checks decidable."""

from dataclasses import dataclass, field, replace
from itertools import product

from . import values as V
from .semantics import ExtState, Fuel


@dataclass(frozen=True)
class Universe:
    pdomains: dict = field(default_factory=dict)
    ldomains: dict = field(default_factory=dict)
    value_domain: tuple = None  # range of unsorted value quantifiers
    max_iter: int = 3
    max_card: int = 2
    mode: str = "exhaustive"  # or "sampled"
    samples: int = 1000
    seed: int = 0
    budget: int = 10 ** 7
    pvars: tuple = None  # all declared program variables (defaults to pdomains)
    lvars: tuple = None

    def __post_init__(self):
        if self.max_card < 1:
            raise ValueError("max_card must be at least 1")
        if self.mode not in ("exhaustive", "sampled"):
            raise ValueError(f"unknown mode {self.mode}")

    def __hash__(self):
        return id(self)

    @property
    def fuel(self):
        return Fuel(self.max_iter, dict(self.pdomains))

    def values_for(self, sort=None):
        if sort == "#nat":
            return tuple(range(self.max_iter + 1))
        if sort is None:
            if self.value_domain is not None:
                return self.value_domain
            return default_value_domain(self.pdomains, self.ldomains)
        if sort.startswith("L."):
            dom = self.ldomains.get(sort[2:])
        else:
            dom = self.pdomains.get(sort)
        if dom is None:
            raise ValueError(f"no finite domain for {sort}")
        return dom

    def with_(self, **kw):
        return replace(self, **kw)

    def all_pvars(self):
        return tuple(sorted(self.pdomains if self.pvars is None else self.pvars))

    def all_lvars(self):
        return tuple(sorted(self.ldomains if self.lvars is None else self.lvars))

    def pin_value(self, x, logical=False):
        dom = (self.ldomains if logical else self.pdomains).get(x)
        return dom[0] if dom else 0

    def grid(self, pvars=None, lvars=None):
        """Extended states varying over the given variables, all others pinned.

        The result is in canonical order.
        """
        pvars = sorted(self.all_pvars() if pvars is None else pvars)
        lvars = sorted(self.all_lvars() if lvars is None else lvars)
        for x in pvars:
            if x not in self.pdomains:
                raise ValueError(f"no finite domain for program variable {x}; "
                                 f"declare one, e.g. --domain {x}=0..3")
        for x in lvars:
            if x not in self.ldomains:
                raise ValueError(f"no finite domain for logical variable {x}; "
                                 f"declare one, e.g. --domain L.{x}=0..3")
        pins_p = {x: self.pin_value(x) for x in self.all_pvars() if x not in pvars}
        pins_l = {x: self.pin_value(x, True) for x in self.all_lvars() if x not in lvars}
        out = []
        for lv in product(*(self.ldomains[x] for x in lvars)):
            ld = dict(zip(lvars, lv))
            ld.update(pins_l)
            for pv in product(*(self.pdomains[x] for x in pvars)):
                pd = dict(zip(pvars, pv))
                pd.update(pins_p)
                out.append(ExtState(ld, pd))
        out.sort(key=ExtState.sort_key)
        return out

    def describe(self):
        out = {
            "pdomains": {k: describe_domain(self.pdomains[k]) for k in sorted(self.pdomains)},
            "ldomains": {k: describe_domain(self.ldomains[k]) for k in sorted(self.ldomains)},
            "maxIter": self.max_iter,
            "maxCard": self.max_card,
            "mode": self.mode if self.mode == "exhaustive" else f"sampled({self.samples}, seed={self.seed})",
        }
        if self.value_domain is not None:
            out["values"] = describe_domain(self.value_domain)
        return out


def describe_domain(dom):
    """``"lo..hi"`` for a contiguous integer range, else the list of JSON values."""
    dom = list(dom)
    if len(dom) > 1 and all(type(v) is int for v in dom) and dom == list(range(dom[0], dom[0] + len(dom))):
        return f"{dom[0]}..{dom[-1]}"
    return [V.to_json(v) for v in dom]


def default_value_domain(pdomains, ldomains):
    ints = set()
    for dom in list(pdomains.values()) + list(ldomains.values()):
        ints.update(v for v in dom if type(v) is int)
    if ints:
        return tuple(sorted(ints))
    return (False, True)


def universe_for(program, **overrides):
    """Universe built from a program's declaration hints plus overrides."""
    pd = {}
    for x, t in program.pvars.items():
        try:
            pd[x] = t.values()
        except ValueError:
            pass
    ld = {}
    for x, t in program.lvars.items():
        try:
            ld[x] = t.values()
        except ValueError:
            pass
    pd.update(overrides.pop("pdomains", {}))
    ld.update(overrides.pop("ldomains", {}))
    overrides.setdefault("pvars", tuple(program.pvars))
    overrides.setdefault("lvars", tuple(program.lvars))
    return Universe(pdomains=pd, ldomains=ld, **overrides)
