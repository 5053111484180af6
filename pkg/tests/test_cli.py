import io
import json
import subprocess
import sys

import pytest

from bogomolov.cli import EXIT_DEFECT, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_compute_g9_json():
    code, out, _ = call("compute", "--catalog", "G9", "--prime", "5", "--json", "--workers", "1")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["bogomolov"]["invariants"] == [5]
    assert d["bogomolov"]["generators"] == ["[c,b] [d,a]^-1"]
    assert d["free_rank"] == 7


def test_json_byte_deterministic():
    args = ("compute", "--catalog", "G20", "--prime", "5", "--json")
    a = call(*args, "--workers", "1")[1]
    b = call(*args, "--workers", "3")[1]
    assert a == b


def test_timings_flag():
    _, out, _ = call("compute", "--catalog", "G2", "--prime", "5", "--json", "--timings")
    assert isinstance(json.loads(out)["timings_ms"], dict)


def test_compute_text_and_cp():
    code, out, _ = call("compute", "--catalog", "G9", "--prime", "7", "--cp", "--workers", "1")
    assert code == EXIT_OK
    assert "Z_7" in out and "[c,b] [d,a]^-1" in out
    assert "comm [d,a] = e T1" in out


def test_default_param_recorded():
    _, out, _ = call("compute", "--catalog", "G25", "--prime", "7", "--json")
    assert json.loads(out)["params"] == {"t": 3}
    _, out, _ = call("compute", "--catalog", "G25", "--prime", "7", "--param", "t=5", "--json")
    assert json.loads(out)["params"] == {"t": 5}


def test_verify_prop31_p7():
    code, out, _ = call("verify", "--prime", "7", "--set", "prop3.1")
    assert code == EXIT_OK
    assert "0 mismatch" in out


def test_verify_reports_unknown_without_failing():
    code, out, _ = call("verify", "--prime", "5", "--ids", "G110", "G9")
    assert code == EXIT_OK
    assert "unknown" in out


def test_verify_mismatch_exit():
    # computed nontrivial, listed trivial
    code, out, _ = call("verify", "--prime", "7", "--ids", "G37", "--json")
    assert code == EXIT_MISMATCH
    assert json.loads(out)["results"][0]["status"] == "MISMATCH"


def test_verify_defect_exit():
    code, out, _ = call("verify", "--prime", "7", "--ids", "G122")
    assert code == EXIT_DEFECT
    assert "error" in out


def test_catalog_list():
    code, out, _ = call("catalog", "list")
    ids = out.split()
    assert code == EXIT_OK and {"G9", "G190", "G110"} <= set(ids)
    assert "G13" in call("catalog", "list", "--stubs")[1].split()


def test_schur_file(tmp_path):
    f = tmp_path / "h.pc"
    f.write_text("group H\nprime 5\ngenerators a b c\ncomm [b,a] = c\n")
    code, out, _ = call("schur", "--file", str(f), "--json")
    assert code == EXIT_OK and json.loads(out)["schur"] == [5, 5]


def test_consistency_and_structure():
    code, out, _ = call("consistency", "--catalog", "G122", "--prime", "5")
    assert code == EXIT_DEFECT and "INCONSISTENT" in out
    code, out, _ = call("consistency", "--catalog", "G43", "--prime", "3")
    assert code == EXIT_OK and "2187" in out
    code, out, _ = call("structure", "--catalog", "G9", "--prime", "5", "--json")
    assert code == EXIT_OK and json.loads(out)["nilpotency_class"] == 4


def test_lemma24_command():
    code, out, _ = call("lemma24", "--catalog", "G9", "--prime", "7", "--trials", "50")
    assert code == EXIT_OK and "0 failures" in out


@pytest.mark.parametrize("argv", [
    ["compute", "--prime", "5"],
    ["compute", "--catalog", "G9"],
    ["compute", "--catalog", "G9", "--prime", "4"],
    ["compute", "--catalog", "NOPE", "--prime", "5"],
    ["compute", "--catalog", "G9", "--file", "x", "--prime", "5"],
    ["compute", "--catalog", "G25", "--prime", "7", "--param", "t"],
    ["compute", "--file", "/no/such/file", "--prime", "5"],
    ["compute", "--catalog", "G9", "--prime", "5", "--strategy", "sampled(1,5)"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    code, _, _ = call(*argv)
    assert code == EXIT_USAGE


def test_budget_errors():
    code, _, err = call("compute", "--catalog", "G9", "--prime", "5", "--strategy", "full")
    assert code == EXIT_DEFECT and "EnumerationBudgetExceeded" in err
    code, _, err = call("compute", "--catalog", "G9", "--prime", "5", "--step-budget", "3")
    assert code == EXIT_DEFECT and "CollectionBudgetExceeded" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "bogomolov", "catalog", "list", "--sets"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "prop3.1" in r.stdout


def test_step_budget_does_not_leak():
    from bogomolov import collector
    before = collector.STEP_BUDGET
    run(["compute", "--catalog", "G9", "--prime", "5", "--step-budget", "3"], io.StringIO(), io.StringIO())
    assert collector.STEP_BUDGET == before
    code = run(["compute", "--catalog", "G9", "--prime", "5", "--json"], io.StringIO(), io.StringIO())
    assert code == 0
