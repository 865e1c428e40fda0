import json

import pytest

from hhl.cli import main

from strategies import CORPUS

C0_RANGE = "forall p' in S. 0 <= p'[x] && p'[x] <= 9"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def c(name):
    return CORPUS / name


def test_verify_holds(capsys):
    code, out, _ = run(capsys, "verify", c("c0.hhl"), "--pre", "true", "--post", C0_RANGE)
    assert code == 0 and out.startswith("HoldsAtBound")


def test_verify_refuted_prints_a_witness(capsys):
    code, out, _ = run(capsys, "verify", c("bad.hhl"), "--pre", "true",
                       "--post", "forall p in S. p[x] >= 5", "--max-card", "1", "--json")
    assert code == 1
    report = json.loads(out)
    assert report["status"] == "Refuted"
    assert report["witness"] == [{"logical": {}, "program": {"x": "0"}}]


def test_verify_unknown_when_budget_runs_out(capsys):
    code, out, _ = run(capsys, "verify", c("c2.hhl"), "--pre", "true",
                       "--post", "exists <q1>, <q2>. q1[l] != q2[l]", "--budget", "1", "--json")
    assert code == 2 and json.loads(out)["status"] == "Unknown"


def test_missing_file_is_a_usage_error(capsys):
    code, _, err = run(capsys, "verify", c("nope.hhl"), "--pre", "true", "--post", "true")
    assert code == 3 and "nope.hhl" in err


def test_parse_error_is_a_usage_error(capsys):
    code, _, err = run(capsys, "verify", c("c0.hhl"), "--pre", "true", "--post", "forall <p>. p[x] <=")
    assert code == 3 and err


def test_disprove_reports_the_strengthened_pre(capsys):
    code, out, _ = run(capsys, "disprove", c("bad.hhl"), "--pre", "true",
                       "--post", "forall p in S. p[x] >= 5", "--max-card", "1")
    assert code == 0
    assert "strengthened precondition: member({x: 0})" in out
    assert "negated postcondition re-verified: HoldsAtBound" in out


def test_check_gni_violation(capsys):
    code, out, _ = run(capsys, "check", c("c4.hhl"), "--proof", c("gni_violation.proof"), "--json")
    report = json.loads(out)
    assert code == 0 and report["accepted"] and report["grade"] == "bounded"


def test_check_fib(capsys):
    code, out, _ = run(capsys, "check", c("fib.hhl"), "--proof", c("fib.proof"))
    assert code == 0 and "grade bounded" in out


def test_admitted_proofs_and_the_admit_flag(capsys, tmp_path):
    prog = tmp_path / "p.hhl"
    prog.write_text("vars x:int(0..2); x := 1")
    proof = tmp_path / "p.proof"
    proof.write_text('(cons :admit :pre "true" (assigns :post "box(x = 1)"))')
    code, out, _ = run(capsys, "check", prog, "--proof", proof, "--json")
    assert code == 0 and json.loads(out)["grade"] == "admitted"
    code, _, _ = run(capsys, "check", prog, "--proof", proof, "--no-admit-ok")
    assert code == 1


def test_check_rejects_a_wrong_proof(capsys, tmp_path):
    proof = tmp_path / "bad.proof"
    proof.write_text('(cons :pre "true" :post "box(x >= 5)" (havocs :post "box(x >= 0)"))')
    code, _, _ = run(capsys, "check", c("bad.hhl"), "--proof", proof, "--max-card", "1")
    assert code == 1


def test_translate_chl(capsys):
    code, out, _ = run(capsys, "translate", "--logic", "chl", "--k", "2",
                       "--pre", "p1[x] >= p2[x]", "--post", "p1[y] >= p2[y]")
    assert code == 0
    assert "p1.L[t] != 1" in out and "p1[y] >= p2[y]" in out


def test_translate_rejects_a_tag_clash(capsys):
    code, _, err = run(capsys, "translate", "--logic", "chl", "--k", "2",
                       "--pre", "p1.L[t] = 1", "--post", "true")
    assert code == 3 and err


def test_sem_dumps_final_states(capsys, tmp_path):
    states = tmp_path / "s.json"
    states.write_text('[{"logical": {}, "program": {"x": "3"}}]')
    code, out, _ = run(capsys, "sem", c("bad.hhl"), "--states", states)
    assert code == 0
    assert [s["program"]["x"] for s in json.loads(out)] == [str(i) for i in range(10)]


def test_total_refutes_a_diverging_loop(capsys):
    code, out, _ = run(capsys, "total", c("recurrent.hhl"), "--pre", "true", "--post", "true")
    assert code == 1 and "no terminating execution" in out


@pytest.mark.parametrize("argv", [
    ("verify", "c0.hhl", "--pre", "true", "--post", C0_RANGE, "--json"),
    ("check", "c4.hhl", "--proof", "gni_violation.proof", "--json"),
    ("verify", "c0.hhl", "--pre", "true", "--post", C0_RANGE, "--json",
     "--samples", "30", "--seed", "5"),
])
def test_json_output_is_byte_stable(capsys, argv):
    argv = [str(c(a)) if a.endswith((".hhl", ".proof")) else a for a in argv]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0
