import json
import subprocess
import sys

import pytest

from qdeform import cli
from qdeform.report import dumps


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def checks(doc):
    return [c for s in doc["suites"] for r in s["reports"] for c in r["checks"]]


def test_pentagon_z2(capsys):
    code, out, _ = run_cli(capsys, "run", "pentagon", "--group", "z2.grp")
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    cs = checks(doc)
    assert len(cs) == 3 and all(c["defect"] == 0 for c in cs)
    assert all(set(c) == {"name", "paper_anchor", "defect", "tolerance", "pass"} for c in cs)


def test_json_schema_and_environment(capsys):
    _, out, _ = run_cli(capsys, "run", "pentagon", "--group", "z3.grp", "--seed", "5", "--tol-identity", "1e-11")
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["suite"] == "pentagon"
    env = doc["environment"]
    assert env["seed"] == 5 and env["tolerances"]["identity"] == 1e-11 and env["tolerances"]["span"] == 1e-8
    assert env["version"] == cli.__version__
    assert out.strip() == dumps(doc)


def test_table_output(capsys):
    code, out, _ = run_cli(capsys, "run", "pentagon", "--group", "z2.grp", "--table")
    assert code == 0
    assert "overall: PASS" in out and out.count("[ok ]") == 3


def test_theorems_with_system_file(capsys):
    code, out, _ = run_cli(capsys, "run", "theorems", "--group", "z2xz2.grp", "--cocycle", "sigma.coc",
                           "--system", "cgd.sys")
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    names = {c["name"][:3] for s in doc["suites"] for r in s["reports"] if r["suite"].startswith("ttwisted")
             for c in r["checks"]}
    assert names >= {"(a)", "(b)", "(c)", "(d)"}


def test_kahlerian_suite(capsys):
    code, out, _ = run_cli(capsys, "run", "kahlerian", "--d", "1", "--theta", "2.0", "--samples", "2000", "--seed", "7")
    doc = json.loads(out)
    assert code == 0
    (rep,) = doc["suites"][0]["reports"]
    assert rep["notes"]["d"] == 1 and len(rep["checks"]) == 15


def test_check_failure_exit_1(capsys):
    code, out, _ = run_cli(capsys, "run", "twisted", "--group", "z2xz2.grp", "--cocycle", "sigma.coc",
                           "--tol-identity", "0", "--tol-span", "0")
    assert code == 1 and not json.loads(out)["pass"]


def test_strict_fails_on_skipped_pairs(capsys):
    code, out, _ = run_cli(capsys, "run", "pentagon", "--group", "s3.grp")
    assert code == 0 and json.loads(out)["skipped"]
    code, _, _ = run_cli(capsys, "run", "pentagon", "--group", "s3.grp", "--strict")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["run", "pentagon", "--group", "missing.grp"],
    ["run", "pentagon", "--cocycle", "sigma.coc"],
    ["run", "cocycle", "--group", "z2.grp", "--cocycle", "sigma.coc"],
    ["run", "kahlerian", "--theta", "0"],
    ["run", "kahlerian", "--d", "-1"],
    ["run", "pentagon", "--group", "z2.grp", "--tol-span", "-1"],
    ["enumerate-cocycles", "s3.grp"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2 and "error" in err


def test_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["run", "nope"])
    assert e.value.code == 2


def test_bad_system_file(tmp_path, capsys):
    p = tmp_path / "bad.sys"
    p.write_text("preset nope\n")
    code, _, _ = run_cli(capsys, "run", "deform", "--group", "z2.grp", "--system", str(p))
    assert code == 2
    p.write_text("preset trivial\nverifiers pentagon frobnicate\n")
    code, _, _ = run_cli(capsys, "run", "all", "--group", "z2.grp", "--system", str(p))
    assert code == 2


def test_system_verifiers_select_suites(tmp_path, capsys):
    p = tmp_path / "x.sys"
    p.write_text("preset trivial\nverifiers pentagon deform\n")
    code, out, _ = run_cli(capsys, "run", "all", "--group", "z2.grp", "--system", str(p))
    doc = json.loads(out)
    assert code == 0 and [s["suite"] for s in doc["suites"]] == ["pentagon", "deform"]


@pytest.mark.parametrize("group, count", [("z1.grp", 1), ("z2.grp", 2), ("z2xz2.grp", 16)])
def test_enumerate_counts(capsys, group, count):
    code, out, _ = run_cli(capsys, "enumerate-cocycles", group)
    doc = json.loads(out)
    assert code == 0 and doc["count"] == count == len(doc["cocycles"])


def test_enumerate_writes_loadable_files(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "enumerate-cocycles", "z2xz2.grp", "--out", str(tmp_path))
    doc = json.loads(out)
    files = sorted(tmp_path.glob("*.coc"))
    assert len(files) == 16
    # non-symmetric representatives are listed first
    flags = [c["symmetric"] for c in doc["cocycles"]]
    assert flags == sorted(flags)
    code, _, _ = run_cli(capsys, "run", "cocycle", "--group", "z2xz2.grp", "--cocycle", str(files[0]))
    assert code == 0


def test_reports_are_byte_stable(capsys):
    argv = ["run", "cohomology", "--group", "z2.grp", "--seed", "3"]
    _, a, _ = run_cli(capsys, *argv)
    _, b, _ = run_cli(capsys, *argv)
    assert a == b


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "qdeform", "run", "pentagon", "--group", "z2.grp", "--table"],
                       capture_output=True, text=True, timeout=120)
    assert p.returncode == 0 and "overall: PASS" in p.stdout
