import csv
import io
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from polycycle.cli import main

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def polylines(path):
    root = ET.parse(path).getroot()
    return root.findall(f".//{SVG_NS}polyline")


# -- sparkling -----------------------------------------------------------------

def test_sparkling_table_and_fit(tmp_path, capsys):
    tbl = tmp_path / "tbl.csv"
    rc, out, _ = run(["sparkling", "--lambda", "2", "--c", "1", "--p0", "0.3679", "--n-max", "40",
                      "--bits", "256", "--out", str(tbl)], capsys)
    assert rc == 0
    r = rows(tbl.read_text())
    assert len(r) == 40 and [int(x["n"]) for x in r] == list(range(1, 41))
    fit = json.loads(out)
    assert set(fit) == {"slope", "intercept", "residual", "window"}
    assert fit["slope"] == pytest.approx(math.log(2), abs=1e-4)


def test_sparkling_single_row(tmp_path, capsys):
    tbl = tmp_path / "one.csv"
    rc, out, _ = run(["sparkling", "--lambda", "2.5", "--c", "0.7", "--p0", "0.3", "--n-max", "1",
                      "--out", str(tbl)], capsys)
    assert rc == 0
    (row,) = rows(tbl.read_text())
    assert float(row["eps"]) == pytest.approx(0.7 * 0.3 ** 2.5, rel=1e-15)


def test_sparkling_missing_lambda(capsys):
    rc, _, err = run(["sparkling", "--n-max", "3"], capsys)
    assert rc == 2
    assert "usage" in err.lower() and "--lambda" in err


def test_module_entry_point_usage():
    p = subprocess.run([sys.executable, "-m", "polycycle", "sparkling"], capture_output=True, text=True)
    assert p.returncode == 2 and "--lambda" in p.stderr
    p = subprocess.run([sys.executable, "-m", "polycycle"], capture_output=True, text=True)
    assert p.returncode == 2


def test_sparkling_numerical_failure(capsys):
    # eps_1 = 1.5 * 0.9**2 > 1 leaves ln(-ln eps) undefined in the fit window
    rc, out, err = run(["sparkling", "--lambda", "2", "--c", "1.5", "--p0", "0.9", "--n-max", "5"], capsys)
    assert rc == 1 and "ln(-ln eps)" in err
    assert rows(out)[0]["ln_neg_ln_eps"] == "nan"


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 3, "c": 0.5, "n_max": 12}))
    rc, out, _ = run(["sparkling", "--config", str(cfg), "--n-max", "6"], capsys)
    assert rc == 0
    r = rows(out.split("\n{")[0] + "\n")
    assert len(r) == 6
    assert float(r[0]["eps"]) == pytest.approx(0.5 * 0.3 ** 3, rel=1e-15)
    cfg.write_text(json.dumps({"lambda": 3, "colour": "red"}))
    rc, _, _ = run(["sparkling", "--config", str(cfg)], capsys)
    assert rc == 2


def test_env_bits(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("POLYCYCLE_BITS", "64")
    tbl = tmp_path / "t.csv"
    run(["sparkling", "--lambda", "2", "--n-max", "3", "--out", str(tbl)], capsys)
    lo = rows(tbl.read_text())[2]["eps"]
    monkeypatch.setenv("POLYCYCLE_BITS", "256")
    run(["sparkling", "--lambda", "2", "--n-max", "3", "--out", str(tbl)], capsys)
    hi = rows(tbl.read_text())[2]["eps"]
    assert len(hi) > len(lo) and float(hi) == pytest.approx(float(lo), rel=1e-15)


# -- staircase / compare / bifdiag ----------------------------------------------------

def test_staircase_phi_one(tmp_path, capsys):
    js = tmp_path / "phi.json"
    rc, _, _ = run(["staircase", "--out", str(tmp_path / "s.csv"), "--json", str(js)], capsys)
    assert rc == 0
    rep = json.loads(js.read_text())
    assert 0.97 <= rep["phi_hat"] <= 1.03
    assert rep["phi"] == 1.0


def test_staircase_ears_and_svg(tmp_path, capsys):
    svg = tmp_path / "s.svg"
    js = tmp_path / "phi.json"
    rc, _, _ = run(["staircase", "--variant", "ears", "--rho", "0.7", "--points", "120", "--out",
                    str(tmp_path / "s.csv"), "--json", str(js), "--svg", str(svg)], capsys)
    assert rc == 0
    rep = json.loads(js.read_text())
    assert rep["variant"] == "ears"
    assert abs(rep["phi_hat"] / rep["phi"] - 1) < 0.03
    lines = polylines(svg)
    assert len(lines) == 2
    names = [pl.get("data-series") for pl in lines]
    assert names[0].startswith("staircase") and names[1].startswith("fit slope")


def test_compare_examples(tmp_path, capsys):
    js = tmp_path / "v.json"
    rc, out, _ = run(["compare", "--lambda", "2", "--lambda-tilde", "2", "--json", str(js)], capsys)
    assert rc == 0
    v = json.loads(js.read_text())
    assert v["ratio_limit"] == 1.0 and v["difference_verdict"] == "bounded"
    assert len(rows(out)) == 21
    rc, _, _ = run(["compare", "--lambda", "2", "--lambda-tilde", "3", "--out", str(tmp_path / "c.csv"),
                    "--json", str(js)], capsys)
    v = json.loads(js.read_text())
    assert v["ratio_limit"] == pytest.approx(1.585, abs=0.02)
    assert v["holder_verdict"] == "growing"


def test_compare_index_shift(tmp_path, capsys):
    base = ["compare", "--lambda", "2", "--lambda-tilde", "2", "--c-tilde", "0.5", "--p0-tilde", "0.2",
            "--n-lo", "10", "--n-hi", "30"]
    outs = []
    for k in (0, 1):
        rc, out, _ = run(base + ["--index-shift", str(k), "--json", str(tmp_path / f"{k}.json")], capsys)
        assert rc == 0
        outs.append(rows(out))
    d0 = {int(r["n"]): float(r["difference"]) for r in outs[0]}
    d1 = {int(r["n"]): float(r["difference"]) for r in outs[1]}
    shift = [d1[n] - d0[n] for n in range(10, 30)]
    # relabeling by one sheet moves ln(-ln eps) by about ln(lambda), so the change is bounded
    assert max(shift) - min(shift) < 0.1
    assert all(abs(s) < 2 for s in shift)
    assert json.loads((tmp_path / "1.json").read_text())["difference_verdict"] == "bounded"


def test_bifdiag_counts_and_styling(tmp_path, capsys):
    svg = tmp_path / "b.svg"
    rc, out, _ = run(["bifdiag", "--n-max", "3", "--m-max", "2", "--svg", str(svg)], capsys)
    assert rc == 0
    curves = json.loads(out)
    assert len(curves) == 3 + 2 + 1
    assert len(polylines(svg)) == 6
    sync = [c for c in curves if c["family"] == "sync"][0]
    xs = [math.log(p[0]) for p in sync["points"]]
    ys = [math.log(p[1]) for p in sync["points"]]
    assert (ys[-1] - ys[0]) / (xs[-1] - xs[0]) == pytest.approx(1.0, rel=1e-9)
    rc, out, _ = run(["bifdiag", "--families", "left", "--svg", str(svg)], capsys)
    assert {c["family"] for c in json.loads(out)} == {"left"}
    assert len(polylines(svg)) == 4
    assert run(["bifdiag", "--families", "left,up"], capsys)[0] == 2


# -- flow ------------------------------------------------------------------------

def test_flow_saddle(capsys):
    rc, out, _ = run(["flow", "saddle", "--family", "bt", "--beta1", "-0.05", "--beta2", "-0.5"], capsys)
    assert rc == 0
    d = json.loads(out)
    mu_u, mu_s = d["eigenvalues"]
    assert mu_u > 0 > mu_s
    assert d["nu"] == pytest.approx(-mu_s / mu_u, rel=1e-15)
    assert d["position"][0] == pytest.approx((0.5 + math.sqrt(0.25 + 0.2)) / 2, abs=1e-12)


def test_flow_homoclinic(capsys):
    rc, out, _ = run(["flow", "homoclinic", "--family", "bt", "--beta2", "-0.5"], capsys)
    assert rc == 0
    d = json.loads(out)
    assert abs(d["splitting"]) < 1e-8
    assert d["saddle"]["nu"] > 1


def test_flow_glued_check(tmp_path, capsys):
    spec = tmp_path / "glasses.json"
    spec.write_text(json.dumps({"lambda": 2, "rho": 0.5, "eps": 0, "sigma": 0, "delta": 0,
                                "geometry": {"disk_radius": 0.3, "channel_width": 0.08,
                                             "centers": {"L": [0, 0], "R": [-1.2, 0]}}}))
    rc, out, _ = run(["flow", "glued-check", "--spec", str(spec)], capsys)
    assert rc == 0
    d = json.loads(out)
    assert d["closed"] and all(abs(v) < 1e-6 for v in d["splittings"].values())
    rc, _, _ = run(["flow", "glued-check", "--spec", str(tmp_path / "missing.json")], capsys)
    assert rc == 2


# -- determinism -----------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["sparkling", "--lambda", "3", "--c", "2", "--p0", "0.1", "--n-max", "20"],
    ["staircase", "--rho", "0.7", "--points", "60"],
    ["compare", "--lambda", "2", "--lambda-tilde", "4", "--n-hi", "30"],
    ["bifdiag", "--samples", "16"],
], ids=["sparkling", "staircase", "compare", "bifdiag"])
def test_threads_independent(argv, tmp_path, capsys):
    outs = []
    for k in (1, 1, 3):
        rc, out, _ = run(argv + ["--threads", str(k)], capsys)
        assert rc == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
