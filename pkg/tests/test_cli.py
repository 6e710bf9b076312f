import json

import numpy as np

from conftest import orb3_data
from charvar.cli import main
from charvar.cocycles import random_parabolic_cocycle
from charvar.serialize import (cocycle_out, dumps_deterministic, representation_in,
                               representation_out, sphere_in, sphere_out)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


SIG2 = '{"g":2,"elliptic":[],"cusps":0}'


def test_identities_pass(capsys):
    code, rep = run_cli(capsys, "identities", "--sig", SIG2)
    assert code == 0
    assert rep["all_pass"] is True
    assert rep["alpha_convention"] == "section_3.1.1"
    assert rep["beta_sign"] == -1
    assert rep["version"]


def test_fox_matches_closed_form(capsys):
    code, rep = run_cli(capsys, "fox", "--sig", SIG2, "--word", "R", "--gen", "a1")
    assert code == 0
    # dR/da_1 = R_0 - R_1 b_1 = 1 - a1 b1 a1^-1
    terms = {t["word"]: t["coeff"] for t in rep["derivative"]}
    assert terms == {"1": 1, "a1 b1 a1^-1": -1}


def test_fox_explicit_word(capsys):
    code, rep = run_cli(capsys, "fox", "--sig", SIG2, "--word", "a1^-1", "--gen", "a1")
    assert code == 0
    assert rep["derivative"] == [{"coeff": -1, "word": "a1^-1"}]


def test_bad_signature_is_input_error(capsys):
    code, rep = run_cli(capsys, "identities", "--sig", "{not json")
    assert code == 1
    assert "error" in rep


def test_fox_unknown_generator(capsys):
    code, rep = run_cli(capsys, "fox", "--sig", SIG2, "--word", "R", "--gen", "c9")
    assert code == 1
    assert "unknown generator" in rep["error"]


def test_goldman_tolerance_failure_exit_2(capsys, tmp_path, orb3_rep):
    rng = np.random.default_rng(1)
    from charvar.cocycles import random_quadpoly
    chi1 = random_parabolic_cocycle(orb3_rep, rng)
    bad = {"values": {g: [[v.real, v.imag] for v in
                          random_quadpoly(rng).coeffs()]
                      for g in orb3_rep.signature.generators}}
    bundle = {"representation": representation_out(orb3_rep),
              "cocycle1": cocycle_out(chi1), "cocycle2": bad}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bundle))
    code, rep = run_cli(capsys, "goldman", "--input", str(path))
    assert code == 2
    assert "error" in rep


def test_monodromy_tolerance_failure_exit_2(capsys, tmp_path):
    cfg = {"points": [[0, 0], [1, 0]], "orders": [None, None],
           "order_infinity": None, "accessory": []}
    path = tmp_path / "sphere.json"
    path.write_text(json.dumps(cfg))
    code, rep = run_cli(capsys, "monodromy", "--input", str(path),
                        "--tol", "wronskian=1e-18")
    assert code == 2
    assert rep["tolerances"]["wronskian"] == 1e-18


def test_missing_kawai_config(capsys):
    code, rep = run_cli(capsys, "kawai", "--config", "missing.json")
    assert code == 1
    assert "error" in rep
    code, rep = run_cli(capsys, "kawai", "--input", "/no/such/file.json")
    assert code == 1


def test_monodromy_subcommand(capsys, tmp_path):
    cfg = {"points": [[0, 0], [1, 0]], "orders": [None, None],
           "order_infinity": None, "accessory": []}
    path = tmp_path / "sphere.json"
    path.write_text(json.dumps(cfg))
    code, rep = run_cli(capsys, "monodromy", "--input", str(path))
    assert code == 0
    assert rep["relation_residual"] < 1e-6
    assert max(rep["trace_residuals"].values()) < 1e-6
    assert rep["wronskian_drift"] < 1e-9
    assert set(rep["representation"]["images"]) == {"c1", "c2", "c3"}


def test_goldman_subcommand_roundtrip(capsys, tmp_path, orb3_rep):
    rng = np.random.default_rng(0)
    chi1 = random_parabolic_cocycle(orb3_rep, rng)
    chi2 = random_parabolic_cocycle(orb3_rep, rng)
    bundle = {"representation": representation_out(orb3_rep),
              "cocycle1": cocycle_out(chi1), "cocycle2": cocycle_out(chi2)}
    path = tmp_path / "bundle.json"
    path.write_text(dumps_deterministic(bundle))
    code, rep = run_cli(capsys, "goldman", "--input", str(path))
    assert code == 0
    from charvar.goldman import goldman_orbifold
    want = goldman_orbifold(orb3_rep, chi1, chi2).value
    got = complex(rep["value"][0], rep["value"][1])
    # JSON roundtrip of the representation loses a little precision
    assert abs(got - want) < 1e-7 * max(1, abs(want))
    assert set(rep["p2_list"]) == {"c1", "c2", "c3", "c4"}


def test_lambda_check_subcommand(capsys):
    code, rep = run_cli(capsys, "lambda-check")
    assert code == 0
    assert rep["max_residual"] <= 1e-8
    assert set(rep["residuals"]) >= {"lambda1", "lambda2", "lambda3", "lambda5",
                                     "b1", "b2", "b3", "lambda4_solver"}


def test_determinism_byte_identical(capsys):
    code1 = main(["identities", "--sig", SIG2])
    out1 = capsys.readouterr().out
    code2 = main(["identities", "--sig", SIG2])
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2


def test_tolerance_override_unknown_rejected(capsys):
    code, rep = run_cli(capsys, "monodromy", "--json", "{}", "--tol", "bogus=1")
    assert code == 1


def test_serialize_roundtrips(orb3_rep):
    rep2 = representation_in(json.loads(dumps_deterministic(representation_out(orb3_rep))))
    assert rep2.signature == orb3_rep.signature
    for g in orb3_rep.signature.generators:
        scale = max(abs(e) for e in orb3_rep.images[g].tuple())
        assert rep2.images[g].psl_distance(orb3_rep.images[g]) < 1e-12 * scale
    data = orb3_data()
    data2 = sphere_in(json.loads(dumps_deterministic(sphere_out(data))))
    assert data2.points == data.points
    assert data2.orders == data.orders
    assert max(abs(a - b) for a, b in zip(data2.residues, data.residues)) < 1e-15


def test_deterministic_float_format():
    s = dumps_deterministic({"x": 0.1, "y": [1.0, float("nan")], "z": 3})
    assert s == '{"x":0.10000000000000001,"y":[1.0,"nan"],"z":3}'


def test_kawai_subcommand_end_to_end(capsys, tmp_path):
    cfg = {
        "sphere": {"points": [[0, 0], [1, 0], [0.3, 0.4]],
                   "orders": [None, None, None], "order_infinity": None,
                   "accessory": [[0.2, 0.1]], "base_point": [0.5, -1.5]},
        "t_directions": [{"velocities": [[0, 0], [0, 0], [1, 0]]}],
        "grid": [{"t": [[0, 0]], "c": [[0, 0]]}],
        "h": 1e-3, "rtol": 1e-12,
    }
    path = tmp_path / "kawai.json"
    path.write_text(json.dumps(cfg))
    code, rep = run_cli(capsys, "kawai", "--input", str(path))
    assert code == 0
    assert rep["labels"] == ["c0", "t2"]
    assert rep["max_antisymmetry_defect"] <= 1e-8 * rep["scale"]
    omega = rep["grid"][0]["omega"]
    assert abs(complex(*omega[0][1])) > 1.0
