from __future__ import annotations

from helpers import xor_chain

from cmw.bpis import BpisInstance
from cmw.circuit import format_bcir, parse_bcir, parse_formula, truth_table, var_order
from cmw.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cc_oracle(capsys):
    assert run(capsys, "cc-oracle", "0110") == (0, "cc=3\n")
    code, _ = run(capsys, "cc-oracle", "0110", "--oracle-max-vars", "1")
    assert code == 2


def test_usage_errors(capsys):
    assert main(["no-such-command"]) == 2
    assert main(["cc-oracle", "011"]) == 2
    assert main(["tt", "/nonexistent/file.bcir"]) == 2


def test_malformed_circuit(tmp_path, capsys):
    p = tmp_path / "bad.bcir"
    p.write_text("inputs x1\ngate 0 AND 1 2\noutput 0\n")
    assert main(["tt", str(p)]) == 2


def test_eval_tt_normalize(tmp_path, capsys):
    p = tmp_path / "c.bcir"
    p.write_text(format_bcir(parse_formula("(1 & x1) | x2")))
    assert run(capsys, "eval", str(p), "--assign", "x1=1,x2=0") == (0, "value=1\n")
    assert run(capsys, "tt", str(p)) == (0, "tt=0111\n")
    rec = tmp_path / "rec.txt"
    code, out = run(capsys, "normalize", str(p), "--record", str(rec))
    assert code == 0 and out.splitlines()[-1] == "eliminated=1"
    circuit, _ = parse_bcir("\n".join(out.splitlines()[:-1]))
    assert str(truth_table(circuit, var_order(2))) == "0111"
    assert "PASS_AND" in rec.read_text()


def test_restrict(tmp_path, capsys):
    p = tmp_path / "x3.bcir"
    p.write_text(format_bcir(xor_chain(3)))
    code, out = run(capsys, "restrict", str(p), "--assign", "x3=0")
    assert code == 0 and out.splitlines()[-1] == "eliminated=3"


def test_output_is_deterministic(tmp_path, capsys):
    outs = {run(capsys, "enumerate-optimal", "0110")[1] for _ in range(2)}
    assert len(outs) == 1 and next(iter(outs)).startswith("count=16\n")


def test_xor_structure(tmp_path, capsys):
    p = tmp_path / "x4.bcir"
    p.write_text(format_bcir(xor_chain(4)))
    code, out = run(capsys, "validate-xor-structure", str(p))
    assert code == 0 and out.startswith("partition=found blocks=3")
    p.write_text(format_bcir(parse_formula("x1 & x2")))
    assert run(capsys, "validate-xor-structure", str(p))[0] == 1


def test_sep_solve_with_witness(tmp_path, capsys):
    w = tmp_path / "w.bcir"
    code, out = run(capsys, "sep-solve", "--f", "0110", "--g", "00101000", "--witness", str(w), "--verify-exhaustive")
    assert code == 0
    assert out.splitlines() == ["answer=yes", f"witness={w}", "bruteforce=yes agree=true"]
    circuit, _ = parse_bcir(w.read_text())
    assert str(truth_table(circuit, var_order(2, 1))) == "00101000"
    assert run(capsys, "sep-solve", "--f", "0110", "--g", "01101001")[0] == 1


def test_sep_solve_with_catalog_file(tmp_path, capsys):
    cat = tmp_path / "cat.txt"
    assert run(capsys, "xor-catalog", "2", "--out", str(cat))[0] == 0
    assert run(capsys, "sep-solve", "--f", "0110", "--g", "00101000", "--catalog", str(cat)) == (0, "answer=yes\n")
    bad = tmp_path / "bad.txt"
    bad.write_text("garbage\n")
    assert main(["sep-solve", "--f", "0110", "--g", "00101000", "--catalog", str(bad)]) == 2


def test_ytree_and_splice_decode(tmp_path, capsys):
    g = tmp_path / "g.bcir"
    g.write_text(format_bcir(parse_formula("(x1 ^ x2) | y1")))
    code, out = run(capsys, "ytree-decompose", str(g), "--f", "0110")
    assert code == 0 and out == "weight=1\ncombiner=7 side=R tree=y1\n"
    base = tmp_path / "f.bcir"
    base.write_text(format_bcir(xor_chain(2)))
    code_file = tmp_path / "code.txt"
    code_file.write_text("origins 00001\norigin 4\nsplice target=10 wires=10 widget=2 moves=c ytree=y1\n")
    code, out = run(capsys, "splice-decode", str(code_file), "--base", str(base))
    assert code == 0
    circuit, _ = parse_bcir(out)
    assert str(truth_table(circuit, var_order(2, 1))) == "01111101"


def test_bpis_commands(tmp_path, capsys):
    p = tmp_path / "inst.txt"
    p.write_text(BpisInstance(2, frozenset({(1, 1, 1, 1)})).format())
    code, out = run(capsys, "bpis-solve", str(p))
    assert code == 0 and out == "answer=yes perm=1,2,4,3\n"
    code, out = run(capsys, "bpis-verify", str(p))
    assert code == 0 and out == "answers_agree=true\nsame_permutations=true\nleast_matches=true\n"
    code, out = run(capsys, "bpis-reduce", str(p))
    assert code == 0 and len(out.strip()) == 4096
    p.write_text("n=1\n1 1 1 1\n")
    assert run(capsys, "bpis-solve", str(p)) == (1, "answer=no\n")


def test_selftest_subset(capsys):
    code, out = run(capsys, "selftest", "--only", "9,12", "--seed", "7")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "seed=7"
    assert [ln.split()[0] for ln in lines[1:3]] == ["criterion=9", "criterion=12"]
    assert lines[-1] == "summary passed=2 failed=0"


def test_selftest_skips_large_criteria(capsys):
    code, out = run(capsys, "selftest", "--only", "1", "--oracle-max-vars", "3")
    assert code == 0 and "status=skipped" in out
