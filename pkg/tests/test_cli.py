import csv
import io
import json
import math
import subprocess
import sys

import pytest

from horoforge.cli import main

LOG2 = math.log(2)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


# --- distance ----------------------------------------------------------------------


def test_minsky_distance(capsys):
    code, rep = run_json(capsys, "distance", "i", "2i")
    assert code == 0 and rep["schema"] == "horoforge/1"
    assert rep["lower_bound"] == pytest.approx(LOG2, abs=1e-6)
    assert rep["oracle"] == pytest.approx(LOG2, abs=1e-15)
    assert rep["witness_count"] > 0 and rep["iterations"] >= 0
    assert {"gap", "argmax_witness"} <= rep.keys()


def test_euclidean_identical_points(capsys):
    code, rep = run_json(capsys, "distance", "1 2", "1 2", "--geometry", "euclidean")
    assert code == 0 and rep["lower_bound"] == 0.0


def test_torus_e1_distance(capsys):
    code, rep = run_json(capsys, "distance", "i", "2i", "--geometry", "torus-e1")
    assert rep["lower_bound"] == pytest.approx(0.5 * LOG2, abs=1e-6)


def test_symmetrized_distance(capsys):
    code, rep = run_json(capsys, "distance", "0,0", "0.5,0", "--geometry", "funk", "--symmetrize")
    assert code == 0
    assert rep["symmetrized"] == pytest.approx(LOG2, abs=1e-15)


def test_distance_csv_has_header_and_one_row(capsys):
    code, out, _ = run(capsys, "distance", "i", "2i", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:4] == ["geometry", "x", "y", "lower_bound"] and len(rows) == 2


def test_parse_error_exits_two_with_column(capsys):
    code, out, err = run(capsys, "distance", "1+x", "2i")
    assert code == 2 and out == ""
    assert "column 3" in err


def test_point_outside_the_domain_exits_two(capsys):
    code, _, err = run(capsys, "distance", "1-i", "2i")
    assert code == 2 and "error" in err


def test_unknown_geometry_exits_two(capsys):
    code, _, err = run(capsys, "distance", "i", "2i", "--geometry", "klein")
    assert code == 2 and "unknown geometry" in err


def test_missing_verb_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


# --- matrix ---------------------------------------------------------------------------


def test_one_point_matrix(capsys, tmp_path):
    f = tmp_path / "one.txt"
    f.write_text("i\n")
    code, rep = run_json(capsys, "matrix", str(f))
    assert code == 0 and rep["matrix"] == [[0.0]]


def test_two_minsky_points_give_a_symmetric_matrix(capsys, tmp_path):
    f = tmp_path / "two.txt"
    f.write_text("# two points\ni\n2i\n")
    code, out, _ = run(capsys, "matrix", str(f), "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["from\\to", "p0", "p1"]
    d01, d10 = float(rows[1][2]), float(rows[2][1])
    assert d01 == pytest.approx(LOG2, abs=1e-6) and abs(d01 - d10) <= 1e-9
    assert "witness_count" in out


def test_e2_matrix_flags_asymmetric_entries(capsys, tmp_path):
    f = tmp_path / "three.txt"
    f.write_text("i\n1+i\n2i\n")
    code, rep = run_json(capsys, "matrix", str(f), "--geometry", "torus-e2", "--symmetrize")
    assert code == 0
    assert len(rep["asymmetric_entries"]) > 0
    for i, j, dij, dji in rep["asymmetric_entries"]:
        assert rep["matrix"][i][j] == dij and rep["matrix"][j][i] == dji
        assert rep["symmetrized"][i][j] == max(dij, dji)


def test_bad_points_file_reports_the_line(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("i\n2i\nbogus\n")
    code, _, err = run(capsys, "matrix", str(f))
    assert code == 2 and "line 3" in err


def test_missing_points_file(capsys, tmp_path):
    code, _, err = run(capsys, "matrix", str(tmp_path / "absent.txt"))
    assert code == 2


# --- boundary ---------------------------------------------------------------------------


def test_minsky_boundary_limit_is_minus_log_height(capsys):
    code, rep = run_json(capsys, "boundary", "geometric:2")
    assert code == 0 and rep["status"] == "converged"
    for z, v in zip(rep["landmarks"], rep["limit"]):
        assert v == pytest.approx(-math.log(z[1]), abs=1e-8)
    assert rep["landmark_count"] == len(rep["landmarks"])


def test_constant_sequence_repeats_one_row(capsys):
    code, out, _ = run(capsys, "boundary", "constant:0", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    by_iter = {}
    for it, idx, _, v in rows:
        by_iter.setdefault(it, []).append(v)
    values = list(by_iter.values())
    assert all(v == values[0] for v in values)
    assert "limit" in by_iter


def test_torus_orbit_converges(capsys):
    code, rep = run_json(capsys, "boundary", "orbit:2,1,1,1:1,0", "--geometry", "torus-e1")
    assert code == 0 and rep["status"] == "converged"


def test_oscillating_sequence_exits_one(capsys):
    code, rep = run_json(capsys, "boundary", "geometric:-1:3")
    assert code == 1 and rep["status"] == "divergent" and rep["limit"] is None


def test_euclidean_ray(capsys):
    code, rep = run_json(capsys, "boundary", "ray:1,0", "--geometry", "euclidean")
    assert code == 0
    for z, v in zip(rep["landmarks"], rep["limit"]):
        assert v == pytest.approx(z[0], abs=1e-9)


@pytest.mark.parametrize("spec", ["nonsense", "spiral:1", "orbit:2,1,1,1"])
def test_bad_sequence_specs(capsys, spec):
    code, _, _ = run(capsys, "boundary", spec, "--geometry", "torus-e1")
    assert code == 2


# --- translation and invariance -------------------------------------------------------------


def test_golden_translation(capsys):
    code, rep = run_json(capsys, "translation", "--matrix", "2 1; 1 1", "--geometry", "torus-e1")
    assert code == 0
    target = math.log((3 + math.sqrt(5)) / 2)
    assert rep["log_dilatation"] == pytest.approx(target, abs=1e-15)
    assert rep["metric"]["extrapolated"] == pytest.approx(target, abs=1e-3)
    assert rep["functional"]["extrapolated"] == pytest.approx(target, abs=1e-2)
    assert rep["north_south"]["status"] == "north-south"


def test_translation_refuses_a_non_invariant_action(capsys):
    code, _, err = run(capsys, "translation", "--matrix", "2 1; 1 1")
    assert code == 2 and "does not preserve" in err


def test_translation_rejects_a_non_unimodular_matrix(capsys):
    code, _, err = run(capsys, "translation", "--matrix", "2 0; 0 1", "--geometry", "torus-e1")
    assert code == 2 and "unimodular" in err


def test_invariance_passes_on_the_torus(capsys):
    code, rep = run_json(capsys, "invariance", "--matrix", "[[3, 2], [1, 1]]", "--geometry", "torus-thurston")
    assert code == 0 and rep["passed"] and rep["defect"] <= 1e-9


def test_invariance_fails_for_minsky(capsys):
    code, rep = run_json(capsys, "invariance", "--matrix", "2 1; 1 1")
    assert code == 1 and not rep["passed"]


def test_geometry_without_an_action(capsys):
    code, _, err = run(capsys, "invariance", "--matrix", "1 0; 0 1", "--geometry", "funk")
    assert code == 2 and "no group action" in err


# --- config, plugins, output -------------------------------------------------------------------


def test_config_file_drives_the_run(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\ngeometry = torus-thurston\nformat = json\n[landmarks]\npoints = i; 2i\n")
    code, out, _ = run(capsys, "distance", "i", "2i", "--config", str(cfg))
    assert json.loads(out)["geometry"] == "torus-thurston"


def test_bad_config_exits_two(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = x\n")
    code, _, err = run(capsys, "distance", "i", "2i", "--config", str(cfg))
    assert code == 2 and "line 2" in err


def test_plugin_geometry(capsys, tmp_path, monkeypatch):
    (tmp_path / "shifted_plugin.py").write_text(
        "from horoforge.geometries import minsky_half_plane\n"
        "def make():\n"
        "    return minsky_half_plane()\n"
    )
    monkeypatch.syspath_prepend(str(tmp_path))
    code, rep = run_json(capsys, "distance", "i", "2i", "--geometry", "shifted_plugin:make")
    assert code == 0 and rep["lower_bound"] == pytest.approx(LOG2, abs=1e-6)
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\ngeometry = custom\n[geometry]\nplugin = shifted_plugin:make\n")
    code, rep = run_json(capsys, "distance", "i", "2i", "--config", str(cfg))
    assert code == 0


@pytest.mark.parametrize("spec", ["no_such_module_xyz:make", "math:no_such_attr", "math:pi"])
def test_bad_plugins_exit_two(capsys, spec):
    code, _, _ = run(capsys, "distance", "i", "2i", "--geometry", spec)
    assert code == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "d.json"
    code, out, _ = run(capsys, "distance", "i", "2i", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "distance"


@pytest.mark.parametrize(
    "argv",
    [
        ["distance", "--geometry", "torus-e2", "--", "0.3+1.2i", "-0.4+0.7i"],
        ["boundary", "orbit:2,1,1,1:1,2", "--geometry", "torus-e1", "--format", "csv"],
        ["translation", "--matrix", "3 2; 1 1", "--geometry", "torus-e1"],
        ["invariance", "--matrix", "2 1; 1 1", "--geometry", "torus-e1", "--seed", "5"],
    ],
)
def test_reports_are_byte_identical_for_a_fixed_seed(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a)] + argv) == main(["--out", str(b)] + argv) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "horoforge.cli", "distance", "i", "2i"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["geometry"] == "minsky"


# --- verify ---------------------------------------------------------------------------------


def test_verify_subset_passes(capsys):
    code, out, _ = run(capsys, "verify", "--criteria", "1,3,4")
    lines = [json.loads(l) for l in out.splitlines()]
    assert code == 0 and [l["criterion"] for l in lines] == [1, 3, 4]
    assert all(l["passed"] and "seconds" not in l for l in lines)


def test_verify_negative_control_names_the_invariant(capsys):
    code, out, _ = run(capsys, "verify", "--criteria", "7", "--corrupt-convention")
    (line,) = [json.loads(l) for l in out.splitlines()]
    assert code == 1 and not line["passed"] and line["failed_invariant"]


def test_verify_with_an_impossible_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--criteria", "4", "--tol-override", "1e-18")
    assert code == 1 and not json.loads(out)["passed"]


@pytest.mark.parametrize("ids", ["13", "1,x"])
def test_verify_rejects_unknown_criteria(capsys, ids):
    code, _, _ = run(capsys, "verify", "--criteria", ids)
    assert code == 2
