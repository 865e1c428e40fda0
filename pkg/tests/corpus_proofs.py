"""Corpus proof reports, computed once per test session."""

import time
from functools import lru_cache

from hhl.prover import check_proof, parse_proof_script
from hhl.syntax import parse_program
from hhl.universe import universe_for

from strategies import CORPUS

PROOFS = ("gni_violation", "gni_loop", "gni_loop_total", "fib", "minimum", "min_mono", "gni_ni")
PROGRAM_OF = {"gni_violation": "c4"}
SECONDS = {}


def program(name):
    return parse_program((CORPUS / f"{PROGRAM_OF.get(name, name)}.hhl").read_text())


def script(name):
    return parse_proof_script((CORPUS / f"{name}.proof").read_text())


@lru_cache(maxsize=None)
def report(name):
    prog = program(name)
    start = time.perf_counter()
    r = check_proof(prog, script(name), universe_for(prog))
    SECONDS[name] = time.perf_counter() - start
    return r
