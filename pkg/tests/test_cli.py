import json

import numpy as np
import pytest

from brakeindex.cli import main
from brakeindex.paths import rotation_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def _rotation_doc(tmp_path, tau=2 * np.pi, **extra):
    doc = rotation_path(tau).to_json()
    doc.update(extra)
    p = tmp_path / "path.json"
    p.write_text(json.dumps(doc))
    return p


def test_index_path_rotation(tmp_path, capsys):
    p = _rotation_doc(tmp_path, omegas=[1.0])
    code, out = run(capsys, "index-path", "--config", str(p))
    rep = json.loads(out)
    row = rep["paths"][0]
    assert code == 0
    assert row["i_omega"]["1+0j"] == [1, 2]
    assert row["i_L0"] == [1, 1] and row["index_difference_passed"]
    assert rep["config"]["seed"] == 0 and "shoot_tol" in rep["config"]["tolerances"]


def test_index_path_errors(tmp_path, capsys):
    p = tmp_path / "empty.json"
    p.write_text(json.dumps({"paths": []}))
    assert run(capsys, "index-path", "--config", str(p))[0] == 1
    p.write_text("{not json")
    assert run(capsys, "index-path", "--config", str(p))[0] == 1
    assert run(capsys, "index-path")[0] == 1


def test_index_path_sampled_needs_refinement(tmp_path, capsys):
    from brakeindex.sympcore import matrix_to_json, rotation
    ts = np.linspace(0, 6 * np.pi, 5)
    doc = {"k": 1, "tau": ts[-1], "kind": "samples",
           "nodes": [{"t": t, "matrix": matrix_to_json(rotation(t))} for t in ts]}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    assert run(capsys, "index-path", "--config", str(p))[0] == 2


def test_verify_small_and_deterministic(capsys):
    code, a = run(capsys, "verify", "--sweep", "30", "--sweep", "6", "--seed", "7")
    assert code == 0
    _, b = run(capsys, "verify", "--sweep", "30", "--sweep", "6", "--seed", "7")
    assert a == b
    rep = json.loads(a)
    assert rep["counts"]["index_difference"] == {"passed": 36, "total": 36}


def test_verify_fault_injection(capsys):
    code, out = run(capsys, "verify", "--sweep", "20", "--sweep", "4", "--inject-fault", "sign-flip")
    assert code == 3
    rep = json.loads(out)
    assert rep["failure_count"] > 0
    sample = rep["failures"][0]["sample"]
    from brakeindex.maslov import theorem21_check
    from brakeindex.paths import path_from_json
    assert theorem21_check(path_from_json(sample)).passed      # the replayed sample is fine


def test_verify_rejects_zero(capsys):
    assert run(capsys, "verify", "--sweep", "0")[0] == 1


def test_bad_tolerance(capsys):
    assert run(capsys, "verify", "--sweep", "2", "--tol", "nope=1")[0] == 1


def test_ellipsoid_bad_radius(capsys):
    assert run(capsys, "ellipsoid", "--radii", "1", "-1")[0] == 1


def test_ellipsoid_sphere_warns(capsys):
    code, out = run(capsys, "ellipsoid", "--radii", "1", "1", "--starts", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["degenerate_shots"] > 0 and any("degenerate" in w for w in rep["warnings"])


def test_ellipsoid_nonresonant_pretty_and_plot(tmp_path, capsys):
    code, out = run(capsys, "ellipsoid", "--radii", "1", str(2 ** 0.25), "--starts", "4",
                    "--pretty", "--plot", str(tmp_path))
    assert code == 0 and "count 2" in out
    assert (tmp_path / "period_vs_radius.svg").exists()
    assert (tmp_path / "index_vs_iterate.svg").exists()


def test_ellipsoid_config_document(tmp_path, capsys):
    p = tmp_path / "e.json"
    p.write_text(json.dumps({"type": "ellipsoid", "radii": [1.0, 2 ** 0.25]}))
    code, out = run(capsys, "ellipsoid", "--config", str(p), "--starts", "4", "--out",
                    str(tmp_path / "r.json"))
    rep = json.loads((tmp_path / "r.json").read_text())
    assert code == 0 and rep["count"] == 2
    assert sorted(o["tau"] for o in rep["orbits"]) == pytest.approx([np.pi, np.pi * np.sqrt(2)])


def test_ellipsoid_near_resonant_example(capsys):
    # radii (1, 1.4142135623): two symmetric brake orbits with periods (pi, 2 pi).
    # The squared ratio is 2 to ten digits, so the plane-2 orbit also sits in a
    # family of non-symmetric brake orbits; the unrestricted count exceeds 2.
    code, out = run(capsys, "ellipsoid", "--radii", "1", "1.4142135623", "--starts", "8")
    rep = json.loads(out)
    assert code == 0
    sym = rep["symmetric_search"]
    assert sym["count"] == 2
    assert sorted(sym["periods"]) == pytest.approx([np.pi, 2 * np.pi], rel=1e-8)
    assert rep["count"] > 2 and rep["warnings"]
