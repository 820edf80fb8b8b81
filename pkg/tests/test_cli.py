import json
import math
import subprocess
import sys

import numpy as np
import pytest

from geodeck.cli import dumps, main


def write_off(path, verts, faces):
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    lines += [" ".join(repr(float(x)) for x in v) for v in verts]
    lines += ["3 " + " ".join(str(i) for i in f) for f in faces]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def tet_off(tmp_path):
    v = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
    return write_off(tmp_path / "tet.off", v, [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])


@pytest.fixture
def dented_off(tmp_path):
    v = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, 0.3]]
    f = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
         [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return write_off(tmp_path / "dent.off", v, f)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_curvature(tet_off, capsys):
    code, out = run(["curvature", tet_off], capsys)
    assert code == 0
    d = json.loads(out.out)
    assert np.allclose(d["defects"], math.pi, atol=1e-12)
    assert d["total"] == pytest.approx(4 * math.pi, abs=1e-9)


def test_enumerate_reports_next_class(capsys):
    code, out = run(["enumerate", "--sides", "0.9,1.0,1.1", "--max-length", "100"], capsys)
    assert code == 0
    d = json.loads(out.out)
    lengths = [g["length"] for g in d["geodesics"]]
    assert lengths == sorted(lengths)
    assert max(lengths) <= 100
    assert d["next"]["length"] >= 100


def test_enumerate_tsv(capsys):
    code, out = run(["enumerate", "--sides", "1,1,1", "--max-length", "4", "--format", "tsv"],
                    capsys)
    rows = out.out.strip().split("\n")
    assert rows[0] == "m\tn\tlength"
    assert float(rows[1].split("\t")[2]) == pytest.approx(2.0)


def test_verify_dented_mesh_is_rejected(dented_off, capsys):
    code, out = run(["verify", "--all", dented_off, "--samples", "1000", "--seed", "7"], capsys)
    assert code == 2
    assert "non-convex" in out.err


def test_verify_is_byte_identical(tet_off, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        assert main(["verify", "--all", tet_off, "--samples", "15", "--seed", "3",
                     "--out", str(target)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_exit_one_on_failure(tet_off, capsys):
    # a tolerance far below rounding error turns float noise into failures
    code, out = run(["verify", "--comparison", tet_off, "--samples", "30",
                     "--tol-angle", "1e-300"], capsys)
    d = json.loads(out.out)
    assert d["reports"][0]["failures"]
    assert code == 1


def test_verify_needs_a_check(tet_off, capsys):
    code, _ = run(["verify", tet_off], capsys)
    assert code == 2


def test_bad_tolerance(tet_off, capsys):
    code, _ = run(["verify", "--all", tet_off, "--tol-angle", "-1"], capsys)
    assert code == 2


def test_realize_regular(capsys):
    code, out = run(["realize", "--sides", "1,1,1", "--m", "1", "--n", "1"], capsys)
    assert code == 0
    d = json.loads(out.out)
    assert d["closed"]
    assert d["total_length"] == pytest.approx(2 * math.sqrt(3), abs=1e-9)


def test_trace(tet_off, capsys):
    code, out = run(["trace", tet_off, "--start", "0:0.3,0.3,0.4", "--direction", "1,0.3",
                     "--length", "1"], capsys)
    assert code == 0
    d = json.loads(out.out)
    assert d["total_length"] == pytest.approx(1.0)
    assert not d["closed"]


def test_distance_between_vertices(tet_off, capsys):
    code, out = run(["distance", tet_off, "--from", "v:0", "--to", "v:1"], capsys)
    assert code == 0
    assert json.loads(out.out)["length"] == pytest.approx(2 * math.sqrt(2))
    assert "-0.0" not in out.out


def test_realize_rejects_non_primitive(capsys):
    code, _ = run(["realize", "--sides", "1,1,1", "--m", "2", "--n", "2"], capsys)
    assert code == 2


def test_double_then_reconstruct(tmp_path, capsys):
    off = tmp_path / "sq.off"
    assert main(["double", "--polygon", "0,0;1,0;1,1;0,1", "--out", str(off)]) == 0
    code, out = run(["reconstruct", str(off)], capsys)
    assert code == 0
    d = json.loads(out.out)
    assert d["degenerate"]
    assert sorted([d["a"], d["b"], d["c"]]) == pytest.approx([1, 1, math.sqrt(2)])


def test_lune_command(capsys):
    code, out = run(["lune", "--sides", "1,1,1", "--min-length", "2"], capsys)
    assert code == 0
    d = json.loads(out.out)
    assert all(l["flags"]["lune_bound"] for l in d["lunes"])


def test_missing_file(capsys):
    code, _ = run(["curvature", "/nonexistent.off"], capsys)
    assert code == 2


def test_unknown_command_exits_two():
    r = subprocess.run([sys.executable, "-m", "geodeck", "frobnicate"], capture_output=True)
    assert r.returncode == 2


def test_dumps_is_stable():
    obj = {"b": 1.0, "a": [0.1, -0.0, float("nan")], "c": {"d": True}}
    assert dumps(obj) == dumps(obj)
    assert json.loads(dumps(obj)) == {"b": 1.0, "a": [0.1, 0.0, None], "c": {"d": True}}
