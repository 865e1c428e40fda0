"""Runtime values: unbounded ints, booleans and immutable lists (tuples).

Python's ``True == 1`` would silently conflate kinds, so every comparison in
the package goes through :func:`values_equal` and :func:`value_key`.
"""


class EvalError(Exception):
    """Dynamic type or index error raised while evaluating an expression."""


def kind(v):
    if type(v) is bool:
        return "bool"
    if type(v) is int:
        return "int"
    if type(v) is tuple:
        return "list"
    raise EvalError(f"not a value: {v!r}")


def value_key(v):
    """Total, kind-aware sort key (bool < int < list)."""
    t = type(v)
    if t is bool:
        return (0, int(v))
    if t is int:
        return (1, v)
    if t is tuple:
        return (2, tuple(value_key(x) for x in v))
    raise EvalError(f"not a value: {v!r}")


def values_equal(a, b):
    return value_key(a) == value_key(b)


def format_value(v):
    t = type(v)
    if t is bool:
        return "true" if v else "false"
    if t is int:
        return str(v)
    if t is tuple:
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    raise EvalError(f"not a value: {v!r}")


def to_json(v):
    """JSON-ready encoding; ints become decimal strings to keep precision."""
    t = type(v)
    if t is bool:
        return v
    if t is int:
        return str(v)
    if t is tuple:
        return [to_json(x) for x in v]
    raise EvalError(f"not a value: {v!r}")


def from_json(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, str):
        return int(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, list):
        return tuple(from_json(x) for x in obj)
    raise ValueError(f"cannot decode value {obj!r}")


def _need_int(v, op):
    if type(v) is not int:
        raise EvalError(f"{op} expects int, got {format_value(v)}")
    return v


def _need_list(v, op):
    if type(v) is not tuple:
        raise EvalError(f"{op} expects list, got {format_value(v)}")
    return v


def need_bool(v, op="condition"):
    if type(v) is not bool:
        raise EvalError(f"{op} expects bool, got {format_value(v)}")
    return v


def binop(op, a, b):
    if op == "+":
        return _need_int(a, op) + _need_int(b, op)
    if op == "-":
        return _need_int(a, op) - _need_int(b, op)
    if op == "*":
        return _need_int(a, op) * _need_int(b, op)
    if op == "xor":
        x, y = _need_int(a, op), _need_int(b, op)
        if x < 0 or y < 0:
            raise EvalError("xor is only defined on non-negative integers")
        return x ^ y
    if op == "++":
        return _need_list(a, op) + _need_list(b, op)
    if op == "index":
        xs, i = _need_list(a, "index"), _need_int(b, "index")
        if not 0 <= i < len(xs):
            raise EvalError(f"index {i} out of range for list of length {len(xs)}")
        return xs[i]
    raise EvalError(f"unknown operator {op}")


def call(fn, args):
    if fn == "len":
        if len(args) != 1:
            raise EvalError("len takes one argument")
        return len(_need_list(args[0], fn))
    if fn in ("max", "min"):
        if len(args) != 2:
            raise EvalError(f"{fn} takes two arguments")
        x, y = _need_int(args[0], fn), _need_int(args[1], fn)
        return max(x, y) if fn == "max" else min(x, y)
    raise EvalError(f"unknown function {fn}")


def compare(op, a, b):
    if op == "=":
        return values_equal(a, b)
    if op == "!=":
        return not values_equal(a, b)
    ka, kb = kind(a), kind(b)
    if ka != kb or ka == "list":
        raise EvalError(f"cannot order {format_value(a)} and {format_value(b)}")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvalError(f"unknown comparison {op}")


CMP_COMPLEMENT = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
