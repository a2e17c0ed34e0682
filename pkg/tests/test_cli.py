import json
import subprocess
import sys

import pytest

from homsec import __version__, gallery
from homsec.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, main
from homsec.document import dumps


def _write(tmp_path, name, raw):
    p = tmp_path / name
    p.write_text(dumps(raw), encoding="utf-8")
    return str(p)


@pytest.fixture
def so2_file(tmp_path):
    return _write(tmp_path, "so2.json", gallery.get("so2_symplectic").document())


def test_check_passing_model(so2_file, capsys):
    assert main(["check", "--model", so2_file]) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["model"] == "so2_symplectic"
    names = [c["name"] for c in report["checks"]]
    assert names == gallery.load_entry("so2_symplectic").checks
    assert {"lie_algebroid", "hms", "equivariance", "homotopy_hamiltonian"} <= set(names)
    m = report["metadata"]
    assert (m["seed"], m["points"], m["tolerance"], m["version"]) == (42, 32, 1e-9, __version__)
    for c in report["checks"]:
        assert set(c) >= {"name", "passed", "max_residual", "argmax", "tolerance"}


def test_perturbed_anchor_fails(tmp_path, capsys):
    raw = gallery.get("so2_symplectic").document()
    raw["algebroid"]["rho"][0][0] = "-y + 0.1*x*x"
    raw["bundle"]["rank"] = 2
    raw["algebroid"]["rho"].append(["1", "0"])
    raw.pop("momentum")
    raw.pop("plectic")
    raw["checks"] = ["lie_algebroid"]
    raw.pop("expected", None)
    assert main(["check", "--model", _write(tmp_path, "bad.json", raw)]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    assert not report["checks"][0]["passed"] and report["checks"][0]["max_residual"] > 1e-3


def test_perturbed_gallery_instance_fails(tmp_path, capsys):
    out = tmp_path / "so3_perturbed.json"
    assert main(["gallery", "run", "so3_perturbed", "--export", str(out)]) == EXIT_FAIL
    capsys.readouterr()
    assert main(["check", "--model", str(out)]) == EXIT_FAIL
    checks = json.loads(capsys.readouterr().out)["checks"]
    assert {c["name"]: c["passed"] for c in checks}["lie_algebroid"] is False


def test_empty_checks_list(tmp_path, capsys):
    raw = gallery.get("so2_symplectic").document()
    raw["checks"] = []
    raw.pop("expected", None)
    assert main(["check", "--model", _write(tmp_path, "empty.json", raw)]) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["checks"] == [] and report["passed"]


@pytest.mark.parametrize(
    "argv_tail",
    [
        ["--tol", "0"],
        ["--tol=-1e-9"],
        ["--points", "0"],
        ["--seed=-3"],
    ],
)
def test_bad_flags_are_input_errors(so2_file, argv_tail, capsys):
    assert main(["check", "--model", so2_file, *argv_tail]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("input error:")


def test_unparseable_flag_exits_two(so2_file):
    with pytest.raises(SystemExit) as e:
        main(["check", "--model", so2_file, "--tol", "abc"])
    assert e.value.code == EXIT_INPUT


def test_input_errors(tmp_path, capsys):
    assert main(["check", "--model", str(tmp_path / "nope.json")]) == EXIT_INPUT
    raw = gallery.get("so2_symplectic").document()
    del raw["algebroid"]["rho"]
    assert main(["check", "--model", _write(tmp_path, "norho.json", raw)]) == EXIT_INPUT
    raw = gallery.get("so2_symplectic").document()
    raw["checks"] = ["lie_algebroid", "warp_drive"]
    assert main(["check", "--model", _write(tmp_path, "unknown.json", raw)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "rho" in err and "warp_drive" in err
    assert main(["gallery", "run", "no_such_instance"]) == EXIT_INPUT


def test_gallery_list(capsys):
    assert main(["gallery", "list"]) == EXIT_PASS
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == gallery.names()


def test_gallery_run_export_matches_check(tmp_path, capsys):
    out = tmp_path / "so3.json"
    assert main(["gallery", "run", "so3_r3", "--export", str(out)]) == EXIT_PASS
    direct = capsys.readouterr().out
    assert main(["check", "--model", str(out)]) == EXIT_PASS
    assert capsys.readouterr().out == direct


def test_text_format(so2_file, capsys):
    assert main(["check", "--model", so2_file, "--format", "text"]) == EXIT_PASS
    text = capsys.readouterr().out
    assert "so2_symplectic" in text and "lie_algebroid" in text and "PASS" in text


def test_flags_override_document(so2_file, capsys):
    assert main(["check", "--model", so2_file, "--points", "5", "--seed", "7", "--tol", "1e-6"]) == EXIT_PASS
    m = json.loads(capsys.readouterr().out)["metadata"]
    assert (m["points"], m["seed"], m["tolerance"]) == (5, 7, 1e-6)


def test_reports_are_byte_identical(so2_file, capsys):
    outs = []
    for _ in range(2):
        main(["check", "--model", so2_file, "--seed", "3"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_module_entry_point(so2_file):
    runs = [subprocess.run([sys.executable, "-m", "homsec", "check", "--model", so2_file], capture_output=True) for _ in range(2)]
    assert [r.returncode for r in runs] == [0, 0]
    assert runs[0].stdout == runs[1].stdout
