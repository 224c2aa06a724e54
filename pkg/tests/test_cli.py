import json
from pathlib import Path

import pytest

from ncqh.cli import main
from ncqh.quiver_core import LOOP, QuiverPresentation, parse_quiver, serialize_quiver

GOLDEN = Path(__file__).parent / "golden"
BASIC_FILE = str(GOLDEN / "basic.quiver")


def _write_quiver(tmp_path, q, name="q.quiver"):
    path = tmp_path / name
    path.write_text(serialize_quiver(q), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------- verify


def test_verify_p2_p3_passes_and_writes_report(tmp_path):
    out = tmp_path / "report.out"
    assert main(["verify", "-q", BASIC_FILE, "--checks", "p2,p3", "-o", str(out), "--quiet"]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] and set(doc["checks"]) == {"p2", "p3"}
    assert doc["checks"]["p3"]["mode"] == "symbolic"


def test_verify_default_checks_report_p1(tmp_path):
    # exit code tracks the P1 verdict; a failed check never yields exit 0
    out = tmp_path / "report.out"
    code = main(["verify", "-q", BASIC_FILE, "--checks", "p1,p2,p3", "-o", str(out), "--quiet"])
    doc = json.loads(out.read_text())
    assert code == (0 if doc["passed"] else 1)
    assert doc["checks"]["p2"]["passed"] and doc["checks"]["p3"]["passed"]


def test_verify_is_deterministic(tmp_path):
    args = ["verify", "-q", BASIC_FILE, "--checks", "p2,rep", "--alpha", "1:1,2:1", "--samples", "2", "--quiet"]
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    main(args + ["-o", str(a)])
    main(args + ["-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_verify_rep_campaign(tmp_path):
    out = tmp_path / "r.out"
    assert main(["verify", "-q", BASIC_FILE, "--checks", "rep", "--alpha", "1:2,2:2", "--samples", "1", "-o", str(out), "--quiet"]) == 0
    rep = json.loads(out.read_text())["checks"]["rep"]
    assert rep["mode"] == "numeric-fallback"


def test_verify_with_derived_omega(tmp_path):
    out = tmp_path / "r.out"
    assert main(["verify", "-q", BASIC_FILE, "--checks", "b1,b2,c", "--derive-omega", "-o", str(out), "--quiet"]) == 0


def test_unknown_check_is_a_usage_error(capsys):
    assert main(["verify", "-q", BASIC_FILE, "--checks", "p9"]) == 2
    assert "usage" in capsys.readouterr().err


def test_omega_check_needs_omega(capsys):
    assert main(["verify", "-q", BASIC_FILE, "--checks", "b1"]) == 2
    assert "omega required: run omega first or pass --derive-omega" in capsys.readouterr().err


@pytest.mark.parametrize("extra", [["--alpha", "1:0,2:1"], ["--alpha", "1:1"], ["--samples", "0", "--checks", "rep"]])
def test_bad_numeric_config(extra):
    assert main(["verify", "-q", BASIC_FILE, "--quiet", *extra]) == 2


def test_missing_or_malformed_quiver_file(tmp_path):
    assert main(["verify", "-q", str(tmp_path / "nope.quiver")]) == 2
    bad = tmp_path / "bad.quiver"
    bad.write_text("{not json")
    assert main(["show", "a", "-q", str(bad)]) == 2


# ---------------------------------------------------------------- fuse


def test_fuse_basic_gives_loop(tmp_path):
    out, tr = tmp_path / "fused.quiver", tmp_path / "fused.json"
    assert main(["fuse", "-q", BASIC_FILE, "1", "2", "-o", str(out), "--transcript", str(tr)]) == 0
    fused = parse_quiver(out.read_text())
    assert len(fused.vertices) == 1 and [a.name for a in fused.arrows] == ["a"]
    doc = json.loads(tr.read_text())
    assert doc["Phi"] == {"1": "g_{a*} + a · a* · g_{a*}"}


def test_fuse_is_byte_identical_on_rerun(tmp_path):
    paths = []
    for k in range(2):
        out, tr = tmp_path / f"f{k}.quiver", tmp_path / f"t{k}.json"
        main(["fuse", "-q", BASIC_FILE, "1", "2", "-o", str(out), "--transcript", str(tr)])
        paths.append((out.read_bytes(), tr.read_bytes()))
    assert paths[0] == paths[1]


def test_fuse_on_one_vertex_quiver(tmp_path):
    assert main(["fuse", "-q", _write_quiver(tmp_path, LOOP), "1", "1"]) == 2


def test_fuse_unknown_vertex():
    assert main(["fuse", "-q", BASIC_FILE, "1", "7"]) == 2


# ---------------------------------------------------------------- omega and show


def test_omega_matches_golden(tmp_path):
    out = tmp_path / "omega.json"
    assert main(["omega", "-q", BASIC_FILE, "-o", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "basic_omega.json").read_bytes()


def test_omega_degenerate_bivector(capsys):
    assert main(["omega", "-q", BASIC_FILE, "--bivector", "0"]) == 1
    assert "NonDegeneracyNotEstablished" in capsys.readouterr().err


def test_omega_of_arrowless_quiver(tmp_path, capsys):
    path = _write_quiver(tmp_path, QuiverPresentation.build([1], []))
    assert main(["omega", "-q", path]) == 0
    assert json.loads(capsys.readouterr().out)["omega"] == "0"


def test_show_normal_form(capsys):
    assert main(["show", "g_a * a"]) == 0
    assert capsys.readouterr().out.strip() == "a · g_{a*}"


def test_show_syntax_error():
    assert main(["show", "a +"]) == 2


def test_no_command_is_a_usage_error():
    assert main([]) == 2
