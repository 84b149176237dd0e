import json
import subprocess
import sys

import jsonschema
import pytest

from cpverify import programs
from cpverify.cli import main
from cpverify.interp import concrete_interpret, postcondition_fails, precondition_holds
from cpverify.report import schema

DOUBLE = """requires x >= 0 && x <= 100
fn double(int x) -> int {
    int y = x + x;
    return y;
}
"""


def verify(capsys, *args):
    try:
        code = main(["verify", *args])
    except SystemExit as exc:   # argument errors leave through argparse
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def json_report(capsys, *args):
    code, out, _ = verify(capsys, *args, "--json", "-")
    doc = json.loads(out)
    jsonschema.validate(doc, schema())
    return code, doc, out


def test_correct_program_exits_zero(capsys):
    code, out, _ = verify(capsys, "binary_search.cpv", "--param", "N=8", "--bits", "31")
    assert code == 0 and "PartiallyCorrect" in out


def test_buggy_program_exits_one_with_witness(capsys):
    code, doc, _ = json_report(capsys, "binary_search_bug.cpv", "--param", "N=8", "--bits", "8")
    assert code == 1 and doc["exit_code"] == 1
    w = doc["witness"]
    ast = programs.load("binary_search_bug", {"N": 8})
    assert precondition_holds(ast, w)
    r = concrete_interpret(ast, w)
    assert r.value == w["result"] == -1 and w["v"] in w["t"]
    assert list(r.trace) == doc["trace"]
    assert postcondition_fails(ast, w, r)


def test_text_report_prints_witness(capsys):
    code, out, _ = verify(capsys, "tritype_bug.cpv")
    assert code == 1
    assert "witness:" in out and "result = 2" in out


def test_missing_file_is_usage_error(capsys):
    code, _, err = verify(capsys, "missing.cpv")
    assert code == 3 and "no such file" in err


@pytest.mark.parametrize("args", [
    ["binary_search.cpv"],                                   # unbound N
    ["binary_search.cpv", "--param", "N=8", "--param", "Q=1"],
    ["binary_search.cpv", "--param", "N=8", "--bits", "40"],
    ["binary_search.cpv", "--param", "N=0"],
    ["binary_search.cpv", "--param", "N"],
])
def test_usage_errors(capsys, args):
    assert verify(capsys, *args)[0] == 3


def test_parse_error_exits_three(tmp_path, capsys):
    f = tmp_path / "bad.cpv"
    f.write_text("fn f(int x) { x = ; }")
    code, _, err = verify(capsys, str(f))
    assert code == 3 and "1:19" in err


def test_resource_limit_exits_four(capsys):
    code, _, err = verify(capsys, "binary_search.cpv", "--param", "N=8", "--max-depth", "2")
    assert code == 4 and "path: <" in err
    code, _, _ = verify(capsys, "binary_search_bug.cpv", "--param", "N=8", "--node-budget", "1")
    assert code == 4


def test_assertion_exits_two(tmp_path, capsys):
    f = tmp_path / "a.cpv"
    f.write_text("fn f(int x) { assert x != 3; }")
    code, doc, _ = json_report(capsys, str(f))
    assert code == 2 and doc["verdict"] == "AssertionViolation" and doc["witness"] == {"x": 3}


def test_overflow_flag(tmp_path, capsys):
    f = tmp_path / "double.cpv"
    f.write_text(DOUBLE)
    code, doc, _ = json_report(capsys, str(f), "--check-overflow")
    assert code == 2 and doc["verdict"] == "OverflowViolation" and doc["witness"]["x"] >= 64
    assert verify(capsys, str(f))[0] == 0


def test_json_is_byte_identical(capsys):
    args = ("tritype_bug.cpv",)
    _, _, a = json_report(capsys, *args)
    _, _, b = json_report(capsys, *args)
    assert a == b
    assert "elapsed_seconds" not in a


def test_timing_is_opt_in(capsys):
    _, doc, _ = json_report(capsys, "tritype.cpv", "--timing")
    assert doc["elapsed_seconds"] >= 0


def test_json_to_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text, _ = verify(capsys, "tritype.cpv", "--json", str(out))
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schema())
    assert code == 0 and doc["paths"]["feasible"] == 10 and "PartiallyCorrect" in text
    assert doc["witness"] is None


def test_jobs_keep_verdict_and_witness(capsys):
    _, a, _ = json_report(capsys, "binary_search_bug.cpv", "--param", "N=8")
    _, b, _ = json_report(capsys, "binary_search_bug.cpv", "--param", "N=8", "--jobs", "4")
    assert (a["verdict"], a["witness"], a["trace"]) == (b["verdict"], b["witness"], b["trace"])


def test_contracts_directory(tmp_path, capsys):
    src = programs.corpus_path("selection_sort").read_text()
    # drop the bundled extern declaration; the directory supplies it instead
    body = src[src.index("\nensures"):]
    f = tmp_path / "sort.cpv"
    f.write_text(body)
    lib = tmp_path / "lib"
    lib.mkdir()
    (lib / "findMin.cpv").write_text(programs.corpus_path("findMin").read_text())
    assert verify(capsys, str(f), "--param", "N=4")[0] == 3
    code, out, _ = verify(capsys, str(f), "--param", "N=4", "--contracts", str(lib))
    assert code == 0, out
    assert verify(capsys, str(f), "--param", "N=4", "--contracts", str(tmp_path / "no"))[0] == 3


def test_run_subcommand(capsys):
    code = main(["run", "tritype_bug", "--input", "i=1", "--input", "j=1", "--input", "k=2"])
    out = capsys.readouterr().out
    assert code == 0 and "result: 2" in out
    code = main(["run", "selection_sort", "--param", "N=3", "--input", "t=3,1,2"])
    out = capsys.readouterr().out
    assert code == 0 and "status: finished" in out


def test_corpus_subcommand(capsys):
    assert main(["corpus"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in programs.CORPUS)
    assert "sum_of_squares (reconstructed)" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cpverify", "verify", "tritype.cpv"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "PartiallyCorrect" in r.stdout
