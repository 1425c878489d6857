import json
import subprocess
import sys

import pytest

from basisforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, expected", [
    (["eval", "x % 0", "-x", "7"], "7"),
    (["eval", "2^(x+x) % (2^x + x)", "-x", "3"], "9"),
    (["eval", "pair(1,2)"], "7"),
    (["eval", "a + b", "-D", "a=2", "-D", "b=40"], "42"),
])
def test_eval(capsys, argv, expected):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == expected


def test_lower_monus(capsys):
    code, out, _ = run(capsys, "lower", "x -. y")
    assert code == 0
    first, meta = out.splitlines()
    assert first == "(2^(x + y) + x) % (2^(x + y) + y) % (2^(x + y) + x)"
    assert "tree=20 dag=8" in meta


def test_lower_verify_product(capsys):
    code, out, _ = run(capsys, "lower", "x * y", "--verify", "0..6")
    assert code == 0 and "PASS" in out


def test_lower_trace_file(capsys, tmp_path):
    path = tmp_path / "trace.jsonl"
    code, _, _ = run(capsys, "lower", "sq(x -. y)", "--trace", str(path))
    assert code == 0
    rules = [json.loads(l)["rule"] for l in path.read_text().splitlines()]
    assert rules == ["monus", "square"]


@pytest.mark.parametrize("argv, code", [
    (["lower", "L(x)"], 3),
    (["eval", "x +"], 1),
    (["eval", "nosuch(x)"], 1),
    (["eval", "x + y", "-x", "1"], 1),
    (["--max-bits", "64", "eval", "2^(2^x) + 1", "-x", "7"], 2),
    (["certify", "x + 1", "--lemma", "mod-exp"], 1),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_usage_error_exits_nonzero():
    with pytest.raises(SystemExit) as info:
        main(["lower", "x", "--verify", "6..2"])
    assert info.value.code != 0


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "2^x % (x % 7)", "--lemma", "mod-exp", "--range", "0..1000")
    assert code == 0 and "B=7" in out and "PASS" in out


def test_certify_random(capsys):
    code, out, _ = run(capsys, "--seed", "3", "certify", "--lemma", "add-mod", "--random", "20",
                       "--range", "0..200")
    assert code == 0 and "20 terms, 0 violations" in out


def test_refute(capsys):
    code, out, _ = run(capsys, "refute", "x + y", "--sig", "mod,exp2", "--size", "7", "--consts", "3")
    assert code == 0 and "NotFoundUpToBound" in out


def test_bases_commands(capsys):
    assert run(capsys, "bases", "mod2-identity", "--range", "0..64")[0] == 0
    code, out, _ = run(capsys, "bases", "h", "27", "625")
    assert code == 0 and out.strip().endswith("5")
    code, out, _ = run(capsys, "bases", "lift", "x + y")
    assert "[L(x) + L(R(x)) | R(R(x))]" in out
    assert run(capsys, "bases", "compile-unary", "2^x % x", "--verify", "0..30")[0] == 0
    assert run(capsys, "bases", "h", "--audit")[0] == 0
    assert run(capsys, "bases", "g", "--audit")[0] == 0


def test_json_output_is_byte_identical(capsys):
    argv = ["--format", "json", "--seed", "11", "refute", "x % 2", "--sig", "add,exp2", "--size", "6"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    rec = json.loads(first.splitlines()[-1])
    assert rec["config"]["seed"] == 11 and rec["config"]["max_size"] == 6


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "basisforge", "eval", "x % 0", "-x", "7"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "7"
