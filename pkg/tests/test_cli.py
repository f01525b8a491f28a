import json
from importlib import resources

import numpy as np
import pytest

from ruledgeom.cli import EXIT_GEOMETRY, EXIT_INVALID, EXIT_OK, EXIT_VERIFY, main
from ruledgeom.io import read_csv


def _small(tmp_path, name, nu=12, nv=9, **edits):
    d = json.loads((resources.files("ruledgeom") / "scenarios" / f"{name}.json").read_text())
    d["grids"]["u"]["num"], d["grids"]["v"]["num"] = nu, nv
    for key, val in edits.items():
        d[key] = val
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(d))
    return str(p)


def test_mesh_and_curvature(tmp_path):
    sc = _small(tmp_path, "helicoid")
    out = tmp_path / "out"
    assert main(["mesh", "--scenario", sc, "--out", str(out)]) == EXIT_OK
    assert main(["curvature", "--scenario", sc, "--out", str(out)]) == EXIT_OK
    obj = (out / "mesh.obj").read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in obj) == 12 * 9
    assert sum(ln.startswith("f ") for ln in obj) == 11 * 8
    c = read_csv(out / "curvature.csv")
    assert np.all(c["K_ext"] <= 1e-12) and np.allclose(c["K_ambient"], 0)
    attrs = read_csv(out / "mesh_attributes.csv")
    assert np.array_equal(attrs["vertex"], np.arange(12 * 9))


def test_invariants_then_reconstruct(tmp_path):
    sc = _small(tmp_path, "helicoid", nu=41)
    out = str(tmp_path)
    assert main(["invariants", "--scenario", sc, "--out", out]) == EXIT_OK
    assert main(["reconstruct", "--scenario", sc, "--out", out]) == EXIT_OK
    r = read_csv(tmp_path / "reconstruct.csv")
    assert np.max(np.abs(r["x"])) < 1e-5 and np.max(np.abs(r["y"])) < 1e-5


def test_reconstruct_needs_a_table(tmp_path):
    assert main(["reconstruct", "--scenario", "helicoid", "--out", str(tmp_path)]) == EXIT_INVALID


def test_example2_striction(tmp_path, capsys):
    sc = _small(tmp_path, "example2", nu=9)
    assert main(["striction", "--scenario", sc, "--out", str(tmp_path)]) == EXIT_OK
    assert "2 striction branch(es)" in capsys.readouterr().out
    s = read_csv(tmp_path / "striction.csv")
    assert set(s["branch_id"]) == {0.0, 1.0}
    for bid, z in ((0, np.pi / 2), (1, 3 * np.pi / 2)):
        assert np.allclose(s["z"][s["branch_id"] == bid], z, atol=1e-9)
    obj = (tmp_path / "striction.obj").read_text()
    assert obj.count("\nl ") == 2


def test_example1_reports_no_striction(tmp_path, capsys):
    sc = _small(tmp_path, "example1", nu=6)
    assert main(["striction", "--scenario", sc, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "0 striction branch(es)" in out and "arctanh-domain violation" in out
    text = (tmp_path / "striction_diagnostics.csv").read_text()
    assert "not_found" in text


def test_base_curve_outside_the_chart(tmp_path):
    d = json.loads((resources.files("ruledgeom") / "scenarios" / "example1.json").read_text())
    d["surface"]["base"]["center"] = [0, 0, -0.5]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert main(["mesh", "--scenario", str(p), "--out", str(tmp_path)]) == EXIT_GEOMETRY


@pytest.mark.parametrize("argv", [
    [],
    ["mesh"],
    ["mesh", "--scenario", "no-such-scenario"],
    ["mesh", "--scenario", "helicoid", "--threads", "0"],
    ["mesh", "--scenario", "helicoid", "--step", "-1"],
    ["verify", "--only", "99"],
])
def test_invalid_invocations(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if len(argv) > 1 and argv[0] != "verify" else [])) == EXIT_INVALID


def test_output_does_not_depend_on_threads(tmp_path, monkeypatch):
    sc = _small(tmp_path, "example3", nu=10)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["striction", "--scenario", sc, "--out", str(a), "--threads", "1"]) == EXIT_OK
    monkeypatch.setenv("RULEDGEOM_THREADS", "3")
    assert main(["striction", "--scenario", sc, "--out", str(b)]) == EXIT_OK
    for f in ("striction.csv", "striction.obj", "striction_diagnostics.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_verify_subset(capsys):
    assert main(["verify", "--only", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("PASS") and "1 passed, 0 failed" in out


def test_verify_failure_exit_code(capsys):
    assert main(["verify", "--only", "10"]) == EXIT_VERIFY


def test_arc_length_invariants_and_reconstruction(tmp_path):
    sc = _small(tmp_path, "example1", nu=21)
    out = str(tmp_path)
    assert main(["invariants", "--scenario", sc, "--out", out, "--arc-length"]) == EXIT_OK
    inv = read_csv(tmp_path / "invariants.csv")
    assert inv["u"][-1] == pytest.approx(2 * np.pi, abs=1e-9)  # unit circle at height 1
    assert main(["reconstruct", "--scenario", sc, "--out", out, "--arc-length"]) == EXIT_OK
    r = read_csv(tmp_path / "reconstruct.csv")
    assert np.allclose(np.hypot(r["x"], r["y"]), 1, atol=1e-6) and np.allclose(r["z"], 1, atol=1e-6)
