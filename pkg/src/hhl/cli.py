"""Command-line entry point.

Exit codes: 0 accepted or holds, 1 refuted or failed, 2 unknown (budget or
bound), 3 usage or parse error.  Reports go to stdout, diagnostics to
stderr.
"""

import argparse
import json
import sys
from pathlib import Path

from lark.exceptions import LarkError

from . import logics
from .assertions import UnsupportedFragment
from .oracle import (check_total_triple, check_triple, disprove, relevant_vars)
from .prover import check_proof, parse_domain, parse_proof_script
from .prover.rules import ProofError
from .prover.script import ScriptError
from .semantics import Interpreter, canonical, stateset_from_json, stateset_to_json
from .lang import desugar
from .syntax import SyntaxError_, assertion_str, parse_assertion, parse_program
from .universe import Universe, universe_for

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"hhl: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _universe_flags(p):
    g = p.add_argument_group("universe")
    g.add_argument("--domain", action="append", default=[], metavar="VAR=DOM",
                   help="finite domain, e.g. x=0..3, L.t=1..2 or 'x={1,4}'")
    g.add_argument("--values", metavar="DOM", help="range of unsorted value quantifiers")
    g.add_argument("--max-iter", type=int)
    g.add_argument("--max-card", type=int)
    g.add_argument("--budget", type=int)
    g.add_argument("--samples", type=int, help="sample this many sets instead of enumerating")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; "
                   "enumeration runs in one process")
    p.add_argument("--json", action="store_true", help="machine-readable report")


def build_parser():
    ap = _Parser(prog="hhl", description="Hyper Hoare Logic checker and bounded oracle")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="check a proof script against a program")
    p.add_argument("program")
    p.add_argument("--proof", required=True)
    p.add_argument("--pre", help="expected precondition (text or @file)")
    p.add_argument("--post", help="expected postcondition (text or @file)")
    p.add_argument("--admit-ok", action=argparse.BooleanOptionalAction, default=True,
                   help="treat admitted obligations as success (default); "
                        "--no-admit-ok makes them exit 1")
    _universe_flags(p)

    for name, text in (("verify", "verify or refute a hyper-triple at the bound"),
                       ("disprove", "find a witness set and a re-verified refutation"),
                       ("total", "check a total hyper-triple (every initial state terminates)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("program")
        p.add_argument("--pre", required=True)
        p.add_argument("--post", required=True)
        _universe_flags(p)

    p = sub.add_parser("sem", help="final states of a program from a JSON state set")
    p.add_argument("program")
    p.add_argument("--states", required=True, help="JSON file with a list of states")
    _universe_flags(p)

    p = sub.add_parser("translate", help="encode a judgment of another logic as a hyper-triple")
    p.add_argument("--logic", required=True, choices=logics.LOGICS)
    p.add_argument("--pre", required=True,
                   help="source precondition over state p (or p1..pk for relational logics)")
    p.add_argument("--post", required=True)
    p.add_argument("--k", type=int, default=2, help="number of executions (or k1 for kue)")
    p.add_argument("--k2", type=int, default=1, help="existential executions for kue")
    p.add_argument("--tag", default="t", help="logical variable tagging executions")
    p.add_argument("--ident", default="u", help="second logical variable for kil and kue")
    p.add_argument("--program", help="declarations supplying finite domains (il, kil)")
    _universe_flags(p)
    return ap


def _text(arg):
    if arg is not None and arg.startswith("@"):
        return Path(arg[1:]).read_text()
    return arg


def _load_program(path):
    return parse_program(Path(path).read_text())


def _universe(args, program=None):
    pd, ld = {}, {}
    for item in args.domain:
        if "=" not in item:
            raise UsageError(f"--domain expects VAR=DOM, got {item!r}")
        var, spec = item.split("=", 1)
        dom = parse_domain(spec)
        if var.startswith("L."):
            ld[var[2:]] = dom
        else:
            pd[var] = dom
    kw = {}
    for flag, key in (("max_iter", "max_iter"), ("max_card", "max_card"),
                      ("budget", "budget"), ("seed", "seed")):
        if getattr(args, flag) is not None:
            kw[key] = getattr(args, flag)
    if args.samples is not None:
        kw["samples"] = args.samples
        kw["mode"] = "sampled"
    if args.values is not None:
        kw["value_domain"] = parse_domain(args.values)
    if program is None:
        return Universe(pdomains=pd, ldomains=ld, **kw)
    return universe_for(program, pdomains=pd, ldomains=ld, **kw)


def _assertion(text, program):
    return parse_assertion(_text(text), program.pvars, program.lvars)


def _require_domains(u, pre, post, command):
    pv, lv = relevant_vars(u, [pre], [post], command)
    try:
        u.grid(pv, lv)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, obj, human):
    if args.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(human)


def _verdict_text(v):
    lines = [v.label()]
    if v.reason:
        lines.append(f"reason: {v.reason}")
    if v.witness is not None:
        lines.append("witness: " + json.dumps(stateset_to_json(v.witness), sort_keys=True))
    if v.rigid:
        lines.append("rigid: " + json.dumps(v.to_json()["rigid"], sort_keys=True))
    if v.sem_result is not None:
        lines.append("final states: " + json.dumps(stateset_to_json(v.sem_result), sort_keys=True))
    if v.tags:
        lines.append("tags: " + ", ".join(sorted(v.tags)))
    if v.universe is not None:
        lines.append("universe: " + json.dumps(v.universe.describe(), sort_keys=True))
    return "\n".join(lines)


def _verdict_code(v):
    return {"holds": EXIT_OK, "refuted": EXIT_FAIL}.get(v.status, EXIT_UNKNOWN)


def cmd_triple(args):
    program = _load_program(args.program)
    u = _universe(args, program)
    pre, post = _assertion(args.pre, program), _assertion(args.post, program)
    _require_domains(u, pre, post, program.body)
    check = check_total_triple if args.command == "total" else check_triple
    v = check(pre, program.body, post, u)
    _emit(args, v.to_json(), _verdict_text(v))
    return _verdict_code(v)


def cmd_disprove(args):
    program = _load_program(args.program)
    u = _universe(args, program)
    pre, post = _assertion(args.pre, program), _assertion(args.post, program)
    _require_domains(u, pre, post, program.body)
    d = disprove(pre, program.body, post, u)
    out = {"verdict": d.verdict.to_json()}
    if d.witness is None:
        _emit(args, out, "no refutation found\n" + _verdict_text(d.verdict))
        return EXIT_FAIL if d.verdict.status == "holds" else EXIT_UNKNOWN
    out["strengthenedPre"] = assertion_str(d.strengthened_pre)
    out["recheck"] = d.recheck.to_json()
    human = "\n".join([_verdict_text(d.verdict),
                       f"strengthened precondition: {out['strengthenedPre']}",
                       f"negated postcondition re-verified: {d.recheck.label()}"])
    _emit(args, out, human)
    return EXIT_OK


def cmd_check(args):
    program = _load_program(args.program)
    u = _universe(args, program)
    script = parse_proof_script(Path(args.proof).read_text())
    pre = _assertion(args.pre, program) if args.pre else None
    post = _assertion(args.post, program) if args.post else None
    report = check_proof(program, script, u, pre, post)
    if args.json:
        print(report.dumps())
    else:
        counts = report.counts()
        print(f"{'Accepted' if report.accepted else 'Rejected'} (grade {report.grade})")
        print("obligations: " + ", ".join(f"{counts[g]} {g}" for g in reversed(list(counts))))
        for o in report.obligations:
            if o.status in ("failed", "admitted"):
                print(f"  [{o.status}] node {o.node}: {o.description}")
        for e in report.errors:
            print(f"  error: {e}")
    if report.errors:
        return EXIT_FAIL
    if report.grade == "failed":
        return EXIT_UNKNOWN if report.unknown else EXIT_FAIL
    if report.grade == "admitted" and not args.admit_ok:
        return EXIT_FAIL
    return EXIT_OK


def cmd_sem(args):
    program = _load_program(args.program)
    u = _universe(args, program)
    try:
        states = stateset_from_json(Path(args.states).read_text())
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad state file: {exc}") from None
    it = Interpreter(u.fuel)
    c = desugar(program.body)
    out = set()
    for s in states:
        out.update(s.with_program(p) for p in it.finals(c, s.program))
    result = stateset_to_json(canonical(out))
    obj = {"states": result, "truncated": bool(it.truncated)}
    human = json.dumps(result, sort_keys=True)
    if it.truncated:
        human += "\n(some loop hit the iteration bound)"
    _emit(args, obj, human)
    return EXIT_OK


def cmd_translate(args):
    name = args.logic
    pre_t, post_t = _text(args.pre), _text(args.post)
    program = _load_program(args.program) if args.program else None
    if name in ("hl", "il", "fu"):
        pre, post = logics.UnaryAssertion(pre_t), logics.UnaryAssertion(post_t)
    else:
        k = args.k + args.k2 if name == "kue" else args.k
        pre, post = logics.TupleAssertion(pre_t, k), logics.TupleAssertion(post_t, k)
    if name == "hl":
        h = logics.from_hl(pre, post)
    elif name == "fu":
        h = logics.from_fu(pre, post)
    elif name == "il":
        h = logics.from_il(pre, post, _universe(args, program))
    elif name == "chl":
        h = logics.from_chl(args.k, pre, post, args.tag)
    elif name == "kfu":
        h = logics.from_kfu(args.k, pre, post, args.tag)
    elif name == "kil":
        h = logics.from_kil(args.k, pre, post, _universe(args, program), args.tag, args.ident)
    else:
        h = logics.from_kue(args.k, args.k2, pre, post, args.tag, args.ident)
    pre_s, post_s = assertion_str(h[0]), assertion_str(h[1])
    _emit(args, {"logic": name, "pre": pre_s, "post": post_s},
          f"pre:  {pre_s}\npost: {post_s}")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "verify": cmd_triple, "total": cmd_triple,
            "disprove": cmd_disprove, "sem": cmd_sem, "translate": cmd_translate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SyntaxError_, ScriptError, ProofError, UnsupportedFragment,
            logics.EncodingError, LarkError, OSError, ValueError) as exc:
        print(f"hhl: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
