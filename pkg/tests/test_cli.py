import json
import subprocess
import sys

import numpy as np
import pytest

from levy_quant.calibrate import synthetic_quotes
from levy_quant.cli import main
from levy_quant.marketdata import ReturnSeries, write_quotes, write_returns
from levy_quant.measure_change import MarketEnv, risk_neutralize
from levy_quant.model_zoo import BS, Merton

BS_PRICE = ["price", "--model", "bs", "--sigma", "0.2", "--mu", "auto", "--s0", "100", "--k", "100", "--r", "0.05",
            "--t", "1"]


@pytest.fixture(autouse=True)
def restore_threads(monkeypatch):
    # --threads writes LEVY_QUANT_THREADS into the process environment
    monkeypatch.delenv("LEVY_QUANT_THREADS", raising=False)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_price_transform(capsys):
    code, out, _ = run(BS_PRICE + ["--method", "transform", "--full-precision"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "price"
    assert abs(float(lines[1]) - 10.450584) < 1e-6


def test_default_nine_digits(capsys):
    _, out, _ = run(BS_PRICE, capsys)
    assert out == "price\n10.4505836\n"


def test_price_json_and_methods(capsys):
    _, out, _ = run(BS_PRICE + ["--method", "pide", "--format", "json"], capsys)
    assert abs(json.loads(out)["price"] - 10.450584) < 5e-2
    _, out, _ = run(BS_PRICE + ["--method", "mc", "--n-paths", "20000", "--format", "json"], capsys)
    res = json.loads(out)
    assert set(res) == {"price", "stderr", "ci95_lo", "ci95_hi"}
    assert abs(res["price"] - 10.450584) < 4 * res["stderr"]


def test_mc_deterministic(capsys):
    argv = BS_PRICE + ["--method", "mc", "--seed", "42", "--n-paths", "30000"]
    first = run(argv, capsys)[1]
    assert run(argv, capsys)[1] == first
    assert run(argv + ["--threads", "1"], capsys)[1] == first
    assert run(argv + ["--threads", "8"], capsys)[1] == first


def test_classify_nig(capsys):
    code, out, _ = run(["classify", "--model", "nig", "--alpha", "15", "--beta", "-3", "--delta", "0.4"], capsys)
    rep = json.loads(out)
    assert code == 0 and '"activity":"infinite","variation":"infinite"' in out
    assert rep["family"] == "nig" and rep["triplet"]["convention"] == "compensate_all"


def test_classify_and_price_share_auto_drift(capsys):
    flags = ["--model", "merton", "--sigma", "0.2", "--lam", "1", "--mu-j", "-0.1", "--sigma-j", "0.1",
             "--r", "0.05", "--mu", "auto", "--full-precision"]
    rep = json.loads(run(["classify"] + flags, capsys)[1])
    expected = risk_neutralize(Merton(0.0, 0.2, 1.0, -0.1, 0.1), MarketEnv(0.05, 0.0, 100.0))
    assert rep["params"]["mu"] == expected.mu


def test_smile(tmp_path, capsys):
    code, out, _ = run(["smile", "--model", "nig", "--alpha", "15", "--beta", "-3", "--delta", "0.4", "--r", "0.05",
                        "--strikes", "90,100,110", "--maturities", "0.5,1"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "maturity_years,strike,price,implied_vol" and len(lines) == 7


def test_simulate(capsys):
    code, out, _ = run(["simulate", "--model", "vg", "--sigma", "0.2", "--theta", "-0.1", "--kappa", "0.2",
                        "--t", "1", "--steps", "4", "--n-paths", "3", "--seed", "5"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,path_0,path_1,path_2" and len(lines) == 6


def test_calibrate_round_trip(tmp_path, capsys):
    env = MarketEnv(0.05, 0.0, 100.0)
    quotes = synthetic_quotes(risk_neutralize(BS(0.0, 0.25), env), env, [0.5, 1.0], [90.0, 100.0, 110.0])
    write_quotes(tmp_path / "q.csv", quotes)
    code, out, _ = run(["calibrate", "--model", "bs", "--sigma", "0.4", "--r", "0.05", "--quotes",
                        str(tmp_path / "q.csv"), "--residuals", str(tmp_path / "res.csv")], capsys)
    payload = json.loads(out)
    assert code == 0 and abs(payload["params"]["sigma"] - 0.25) < 1e-6
    (tmp_path / "fit.json").write_text(out)
    # fitted parameters are a valid --model input
    code, out, _ = run(["price", "--model", str(tmp_path / "fit.json"), "--r", "0.05", "--k", "100", "--t", "1"],
                       capsys)
    assert code == 0 and float(out.splitlines()[1]) > 0
    assert (tmp_path / "res.csv").read_text().startswith("maturity_years,strike,market_vol,model_vol,weight")


def test_fit_returns(tmp_path, capsys):
    rng = np.random.default_rng(1)
    write_returns(tmp_path / "r.csv", ReturnSeries(0.01 * rng.standard_normal(200)))
    code, out, _ = run(["fit-returns", "--model", "bs", "--returns", str(tmp_path / "r.csv"),
                        "--qq", str(tmp_path / "qq.csv")], capsys)
    assert code == 0 and json.loads(out)["n"] == 200
    assert len((tmp_path / "qq.csv").read_text().splitlines()) == 201


class TestErrors:
    def test_config_error(self, capsys):
        code, _, err = run(["price", "--model", "bs", "--k", "100", "--t", "1"], capsys)
        assert code == 2 and json.loads(err)["error"] == "ConfigError"

    def test_user_drift_refused(self, capsys):
        code, _, err = run(BS_PRICE[:6] + ["0.3"] + BS_PRICE[7:], capsys)
        assert code == 2 and "martingale" in json.loads(err)["message"]

    def test_module_error(self, capsys):
        code, _, err = run(["price", "--model", "cgmy", "--C", "1", "--G", "5", "--M", "0.9", "--Y", "0.5",
                            "--k", "100", "--t", "1"], capsys)
        payload = json.loads(err)
        assert code == 3 and payload["error"] == "StripViolation"

    def test_io_error(self, tmp_path, capsys):
        code, _, err = run(["calibrate", "--model", "bs", "--sigma", "0.2", "--quotes", str(tmp_path / "none.csv")],
                           capsys)
        assert code == 4 and json.loads(err)["error"] == "FileNotFoundError"

    def test_unknown_flag(self, capsys):
        assert run(["price", "--bogus"], capsys)[0] == 2

    def test_wrong_parameter_for_family(self, capsys):
        code, _, err = run(["classify", "--model", "bs", "--sigma", "0.2", "--alpha", "3"], capsys)
        assert code == 2 and "alpha" in json.loads(err)["message"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "levy_quant"] + BS_PRICE, capture_output=True, text=True,
                          check=True)
    assert proc.stdout == "price\n10.4505836\n"
