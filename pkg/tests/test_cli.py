import csv
import io
import json

import pytest

from frac_riccati.cli import fmt, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_solve_csv(capsys):
    code, out, _ = run(capsys, "solve", "--lambda", "0.5", "--mu", "-0.3", "--nu", "0.8", "--alpha", "0.62",
                       "--T", "0.5", "--n", "256")
    assert code == 0
    assert out.splitlines()[0] == "method,steps,psi,i1_psi,i1ma_psi"
    (r,) = rows(out)
    assert r["method"] == "hybrid-rr3" and r["steps"] == "256"
    mantissa = r["psi"].split("e")[0].lstrip("-").replace(".", "")
    assert len(mantissa.lstrip("0")) <= 10


def test_fmt():
    assert fmt(1 / 3) == "0.3333333333"
    assert fmt(float("inf")) == "+inf"
    assert fmt(None) == ""
    assert fmt(1 + 2j) == "1+2j"
    assert fmt(2.5 + 0j) == "2.5"


def test_radius_infinite_for_zero_lambda(capsys):
    code, out, _ = run(capsys, "radius", "--lambda", "0", "--mu", "0.5", "--nu", "1", "--alpha", "0.7")
    assert code == 0
    assert rows(out)[0]["tau_star"] == "+inf"


def test_radius_reference_frequencies(capsys):
    code, out, _ = run(capsys, "radius", "--u1", "5,10,50", "--n", "200")
    assert code == 0
    got = [float(r["tau_star"]) for r in rows(out)]
    assert got == pytest.approx([5.6586, 2.3846, 0.2201], abs=1e-3)
    assert all(r["sandwich"] in ("PASS", "N/A") for r in rows(out))


def test_triplet_json(capsys):
    code, out, _ = run(capsys, "triplet", "--u1", "0.5j", "--t", "0.5", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert set(body) >= {"psi", "i1_psi", "i1ma_psi", "cf", "solver"}
    assert abs(complex(*body["cf"])) <= 1.0


def test_domain_error_exit(capsys):
    code, _, err = run(capsys, "solve", "--lambda", "1", "--mu", "0", "--nu", "1", "--alpha", "0.6", "--t", "5",
                       "--method", "series")
    assert code == 2 and "error" in err


def test_validation_error_exit(capsys):
    code, _, _ = run(capsys, "solve", "--lambda", "1", "--mu", "0", "--nu", "1", "--alpha", "-0.5", "--t", "1")
    assert code == 2


def test_blow_up_exit(capsys):
    code, _, err = run(capsys, "solve", "--lambda", "1", "--mu", "0", "--nu", "1", "--alpha", "0.62", "--t", "5")
    assert code == 3 and err.startswith("frac-riccati: error:")


def test_missing_config_exit(capsys, tmp_path):
    code, _, _ = run(capsys, "solve", "--config", str(tmp_path / "nope.ini"))
    assert code == 4


def test_unwritable_output_exit(capsys, tmp_path):
    code, _, _ = run(capsys, "skew", "--alphas", "1.0", "--maturities-days", "21",
                     "--output", str(tmp_path / "missing" / "out.csv"))
    assert code == 4


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solve": {"lam": 1, "bogus": 2}}))
    code, _, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 2


def test_ini_config_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[solve]\nlambda = 0.5\nmu = -0.3\nnu = 0.8\nalpha = 0.62\nT = 0.5\nn = 64\n")
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0 and rows(out)[0]["steps"] == "64"
    code, out, _ = run(capsys, "solve", "--config", str(cfg), "--n", "128")
    assert code == 0 and rows(out)[0]["steps"] == "128"


def test_json_config_flat(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lam": 0.5, "mu": -0.3, "nu": 0.8, "alpha": 0.62, "t": 0.5, "method": "adams",
                               "n": 64}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0 and rows(out)[0]["method"] == "adams"


def test_price_columns_and_stability(capsys, tmp_path):
    argv = ["price", "--maturities-days", "21,252", "--strikes", "95,100", "--no-step-search"]
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    assert out1.splitlines()[0] == "maturity_days,strike_pct,method,steps,price,implied_vol,cpu_ms,flags"
    code, out2, _ = run(capsys, *argv)
    strip = lambda t: [{k: v for k, v in r.items() if k != "cpu_ms"} for r in rows(t)]  # noqa: E731
    assert strip(out1) == strip(out2)
    assert {r["method"] for r in rows(out1)} == {"hybrid", "adams"}


def test_skew_output_file(capsys, tmp_path):
    target = tmp_path / "skew.csv"
    code, out, _ = run(capsys, "skew", "--alphas", "0.62", "--maturities-days", "21,252", "-o", str(target))
    assert code == 0 and out == ""
    got = rows(target.read_text())
    assert [r["maturity_days"] for r in got] == ["21", "252"]
    assert all(float(r["skew"]) < 0 for r in got)


def test_convergence_columns(capsys):
    code, out, _ = run(capsys, "convergence", "--ns", "8,16,32", "--n-ref", "256")
    assert code == 0
    assert out.splitlines()[0] == "n,cbar1,err_plain,err_rr2,err_rr3"
    assert len(rows(out)) == 3
