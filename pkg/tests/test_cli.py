import json
import subprocess
import sys

import numpy as np

from phasecalc.cli import EXIT_DIVERGENCE, EXIT_INPUT, EXIT_OK, main
from phasecalc.grids import read_grid_symbol
from phasecalc.order_functions import bracket, constant, product


def job(tmp_path, command, options, *extra, name="job"):
    cfg = tmp_path / f"{name}.json"
    cfg.write_text(json.dumps(options))
    out = tmp_path / f"{name}.out.json"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_certify_order(tmp_path):
    code, rep = job(tmp_path, "certify-order", {"m": bracket(1, 3).to_json(), "samples": 2000})
    assert code == EXIT_OK and rep["status"] == "pass"
    assert rep["result"]["certificate"]["N0"] == 3
    assert set(rep) >= {"command", "config_hash", "seed", "versions", "result", "exit_code"}


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["certify-order", "--config", str(bad)]) == EXIT_INPUT
    assert main(["certify-order", "--config", str(tmp_path / "missing.json")]) == EXIT_INPUT
    code, rep = job(tmp_path, "certify-order", {"m": {"const": -1.0}})
    assert code == EXIT_INPUT and rep["status"] == "input error"
    code, _ = job(tmp_path, "bound", {"m": bracket(1, -3, block="xstar").to_json()}, "--tol", "-1")
    assert code == EXIT_INPUT
    code, _ = job(tmp_path, "certify-symbol", {"symbol": "family:nope",
                                               "m": bracket(1, -4, block="xstar").to_json()})
    assert code == EXIT_INPUT
    code, _ = job(tmp_path, "certify-symbol", {"symbol": "nofile.json",
                                               "m": bracket(1, -4, block="xstar").to_json()})
    assert code == EXIT_INPUT


def test_compose_separable_and_divergent(tmp_path):
    m4 = bracket(1, -4, block="xstar").to_json()
    code, rep = job(tmp_path, "compose", {"m1": m4, "m2": m4, "fit": False})
    assert code == EXIT_OK and rep["result"]["m3"] == "<x*>^{-4}"
    m1 = bracket(1, -1, block="xstar").to_json()
    code, rep = job(tmp_path, "compose", {"m1": m1, "m2": m1, "fit": False}, name="div")
    assert code == EXIT_DIVERGENCE


def test_certify_symbol_modes(tmp_path):
    m = bracket(1, -4, block="xstar").to_json()
    code, rep = job(tmp_path, "certify-symbol", {"symbol": "family:gauss", "m": m})
    assert code == EXIT_OK and rep["result"]["agree"]
    assert set(rep["result"]["verdicts"]) == {"lattice", "stft", "bargmann"}
    code, rep = job(tmp_path, "certify-symbol", {"symbol": "family:zero", "m": m,
                                                 "modes": ["stft", "bargmann"]}, name="zero")
    assert code == EXIT_OK
    assert all(r["norm"] == 0 for r in rep["result"]["reports"].values())
    code, _ = job(tmp_path, "certify-symbol", {"symbol": "family:gauss", "m": m,
                                               "modes": ["fourier"]}, name="badmode")
    assert code == EXIT_INPUT


def test_quantize_and_moyal_outputs(tmp_path):
    code, rep = job(tmp_path, "quantize", {"symbol": "family:gauss", "matrix": "A.npy"},
                    "--grid", "32")
    assert code == EXIT_OK and rep["result"]["shape"] == [32, 32]
    assert rep["result"]["hermitian"]
    # xi-axis short of the position-grid Nyquist frequency
    code, _ = job(tmp_path, "quantize", {"symbol": "family:gauss"}, "--grid", "32,5.0",
                  name="short")
    assert code == EXIT_INPUT
    code, rep = job(tmp_path, "moyal", {"a": "family:gauss", "b": "family:shift",
                                        "product": "c.json"}, name="moyal")
    assert code == EXIT_OK and rep["result"]["composition_error"] <= 1e-6
    c = read_grid_symbol(tmp_path / "c.json")
    assert c.values.shape == (48, 48) and np.all(np.isfinite(c.values))


def test_bound_targets(tmp_path):
    code, rep = job(tmp_path, "bound", {"m": bracket(1, -3, block="xstar").to_json(),
                                        "target": "l1_fiber"})
    assert code == EXIT_OK and abs(rep["result"]["bound_over_2pi"] - 1) <= 1e-4
    code, rep = job(tmp_path, "bound", {"m": constant(1).to_json(), "target": "l1_fiber"},
                    name="div")
    assert code == EXIT_DIVERGENCE and rep["result"]["certificate"]["finite"] is False
    code, _ = job(tmp_path, "bound", {"m": bracket(1, -3).to_json(), "target": "nuclear"},
                  name="bad")
    assert code == EXIT_INPUT
    m = product(bracket(1, -3, block="x"), bracket(1, -3, block="xstar")).to_json()
    code, rep = job(tmp_path, "bound", {"m": m, "target": "cp", "p": "inf"}, name="cp")
    assert code == EXIT_OK and rep["result"]["diagonal"]["finite"]


def test_reports_are_deterministic(tmp_path):
    opts = {"m": bracket(1, 2, block="x").to_json(), "samples": 1000}
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(opts))
    for out in (a, b):
        assert main(["certify-order", "--config", str(cfg), "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["certify-order", "--config", str(cfg), "--seed", "8", "--out", str(b)]) == 0
    assert json.loads(a.read_text())["config_hash"] != json.loads(b.read_text())["config_hash"]


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": bracket(1, -3, block="xstar").to_json(), "target": "l1_fiber"}))
    p = subprocess.run([sys.executable, "-m", "phasecalc", "bound", "--config", str(cfg)],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["exit_code"] == 0
    assert "bound: pass" in p.stderr
