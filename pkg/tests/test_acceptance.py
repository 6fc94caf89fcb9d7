"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a single PASS/FAIL line through the ``criterion`` fixture;
the lines are echoed in the terminal summary under "acceptance criteria".
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from levy_quant.calibrate import bs_price, calibrate_smile, fit_returns_mle, synthetic_quotes
from levy_quant.levy_core import (FiniteActivity, LevyTriplet, NormalJumps, PointMass, DoubleExponential,
                                  characteristic_function, cumulant, infinite_divisibility_residual, levy_exponent)
from levy_quant.marketdata import ReturnSeries, write_quotes, write_returns
from levy_quant.measure_change import (BlackScholesCase, EsscherParams, JumpDiffusionCase, MarketEnv, PoissonCase,
                                       esscher_transform, market_price_of_risk, martingale_residual, risk_neutralize)
from levy_quant.model_zoo import BS, NIG, VG, Kou, Merton, model_cf, nig_convolve
from levy_quant.price_mc import mc_price
from levy_quant.price_pide import PideGrid, solve_pide
from levy_quant.price_transform import (PayoffSpec, QuadratureSpec, admissible_damping, payoff_laplace,
                                        transform_price)
from levy_quant.simulate import TimeGrid, poisson_integral_stats, simulate_model, simulate_nig

from conftest import SIMULABLE, ZOO
from oracles import numeric_laplace, z_mean, z_var

N = 100_000
ENV = MarketEnv(0.05, 0.0, 100.0)
MATRIX_MODELS = {"bs": BS(0.0, 0.2), "merton": Merton(0.0, 0.15, 1.0, -0.1, 0.15), "nig": NIG(15.0, -3.0, 0.4)}
MONEYNESS = (0.8, 0.9, 1.0, 1.1, 1.2)


@pytest.mark.acceptance(1)
def test_cross_engine_agreement(criterion):
    t0 = time.perf_counter()
    worst_bs, worst_pide, covered, cells = 0.0, 0.0, 0, 0
    for i, (name, base) in enumerate(MATRIX_MODELS.items()):
        m = risk_neutralize(base, ENV)
        grid = PideGrid.for_model(m, 1.0, n_std=8.0, n_x=400, n_t=200)
        for j, k in enumerate(MONEYNESS):
            K = 100.0 * k
            payoff = PayoffSpec("call", K)
            tp = transform_price(m, ENV, 1.0, payoff)
            if name == "bs":
                worst_bs = max(worst_bs, abs(tp - bs_price(ENV, 1.0, K, 0.2)))
            pide = solve_pide(m, ENV, 1.0, payoff, grid).price
            worst_pide = max(worst_pide, abs(pide - tp) / tp)
            mc = mc_price(m, ENV, 1.0, payoff, N, seed=1000 + 10 * i + j)
            covered += mc.covers(tp, 3.0)
            cells += 1
    elapsed = time.perf_counter() - t0
    ok = worst_bs < 1e-6 and worst_pide < 1e-2 and covered >= 14 and elapsed < 300
    criterion(1, ok, f"transform-vs-BS max {worst_bs:.1e} (<1e-6), PIDE max rel {worst_pide:.1e} (<1e-2), "
                     f"MC covers {covered}/{cells} (>=14), {elapsed:.0f}s (<300s)")
    assert ok


@pytest.mark.acceptance(2)
def test_martingale_suite(criterion):
    env = MarketEnv(0.05, 0.02, 100.0)
    worst_z, worst_res = 0.0, 0.0
    for name in SIMULABLE:
        m = risk_neutralize(ZOO[name], env)
        worst_res = max(worst_res, abs(martingale_residual(m.triplet(), env)))
        L = simulate_model(m, TimeGrid.uniform(1.0, 1), N, 2).terminal
        worst_z = max(worst_z, abs(z_mean(math.exp(-env.carry) * np.exp(L), 1.0)))
    ok = worst_z < 4 and worst_res < 1e-12
    criterion(2, ok, f"{len(SIMULABLE)} models, max |z| {worst_z:.2f} (<4), max residual {worst_res:.1e} (<1e-12)")
    assert ok


@pytest.mark.acceptance(3)
def test_identity_suite(criterion):
    u = np.linspace(-10.0, 10.0, 21)
    worst = {"psi0": 0.0, "phi0": 0.0, "herm": 0.0, "semi": 0.0, "agree": 0.0}
    for m in ZOO.values():
        tr = m.triplet()
        worst["psi0"] = max(worst["psi0"], abs(levy_exponent(tr, 0.0)))
        worst["phi0"] = max(worst["phi0"], np.max(np.abs(characteristic_function(tr, 0.0, u) - 1)),
                            abs(characteristic_function(tr, 2.0, 0.0) - 1))
        a, b = characteristic_function(tr, 0.7, u), characteristic_function(tr, 0.7, -u)
        worst["herm"] = max(worst["herm"], np.max(np.abs(a - np.conj(b))))
        s, t = characteristic_function(tr, 0.3, u), characteristic_function(tr, 0.4, u)
        worst["semi"] = max(worst["semi"], np.max(np.abs(characteristic_function(tr, 0.7, u) - s * t)))
        quad = characteristic_function(tr, 1.0, u, method="quadrature")
        worst["agree"] = max(worst["agree"], np.max(np.abs(quad - model_cf(m, 1.0, u))))

    class Poisson:
        def cf(self, t, v):
            return characteristic_function(LevyTriplet(0.0, 0.0, FiniteActivity(2.5, PointMass(1.0))), t, v)

    id_normal = infinite_divisibility_residual(BS(0.3, 0.7), 4, np.linspace(-5, 5, 41))
    id_poisson = infinite_divisibility_residual(Poisson(), 7, np.linspace(-5, 5, 41))
    ok = (worst["psi0"] == 0 and worst["phi0"] == 0 and worst["herm"] < 1e-12 and worst["semi"] < 1e-12
          and id_normal < 1e-12 and id_poisson < 1e-12 and worst["agree"] < 1e-8)
    criterion(3, ok, f"psi(0) {worst['psi0']:.0e}, phi(t,0)-1 {worst['phi0']:.0e}, hermitian {worst['herm']:.0e}, "
                     f"semigroup {worst['semi']:.0e}, ID normal {id_normal:.0e} poisson {id_poisson:.0e}, "
                     f"triplet/cf {worst['agree']:.1e} (<1e-8)")
    assert ok


@pytest.mark.acceptance(4)
def test_poisson_random_measure(criterion):
    cases = [
        (2.0, NormalJumps(-0.05, 0.3), lambda x: x, [(-np.inf, -0.01), (0.01, np.inf)], 1.0),
        (3.0, DoubleExponential(0.4, 5.0, 3.0), lambda x: x * x, [(0.05, 1.0)], 2.0),
        (1.5, NormalJumps(0.1, 0.5), lambda x: math.exp(x) - 1, [(-2.0, -0.2), (0.3, 3.0)], 0.5),
    ]
    worst = 0.0
    for k, (lam, law, f, region, t) in enumerate(cases):
        st_ = poisson_integral_stats(lam, law, f, region, t, N, 40 + k)
        worst = max(worst, abs(st_.mean_z), abs(st_.var_z))
    ok = worst < 4
    criterion(4, ok, f"3 (f, A) pairs, max |z| of mean/variance {worst:.2f} (<4)")
    assert ok


@pytest.mark.acceptance(5)
def test_esscher_suite(criterion):
    z = np.linspace(-0.9, 0.9, 21)
    worst_shift = 0.0
    for m, theta in ((ZOO["nig"], 1.5), (ZOO["kou"], 1.0)):
        tr = m.triplet()
        out = esscher_transform(tr, EsscherParams(theta, theta))
        shift = cumulant(tr, z + theta) - cumulant(tr, theta)
        worst_shift = max(worst_shift, np.max(np.abs(cumulant(out, z) - shift)))
    nig_tr = ZOO["nig"].triplet()
    identity = esscher_transform(nig_tr, EsscherParams(0.0, 0.0)) is nig_tr
    env = MarketEnv(0.05)
    bs = market_price_of_risk(BlackScholesCase(0.05, 0.04), env)
    bs2 = market_price_of_risk(BlackScholesCase(0.11, 0.04), env)
    po = market_price_of_risk(PoissonCase(0.05, 0.3, 2.0), env)
    po2 = market_price_of_risk(PoissonCase(0.02, 0.3, 2.0), env)
    formulas = (bs.beta == -0.5 and abs(bs2.beta - ((0.05 - 0.11) / 0.04 - 0.5)) < 1e-15
                and abs(po.Y - 0.3 / math.expm1(0.3)) < 1e-15
                and abs(po2.Y - (0.05 - 0.02 + 0.3 * 2.0) / (math.expm1(0.3) * 2.0)) < 1e-15)
    inc_eq = max(abs(market_price_of_risk(JumpDiffusionCase(0.12, 0.04, -0.2, 1.5, e), env).residual)
                 for e in (0.25, 0.5, 0.75))
    ok = worst_shift < 1e-10 and identity and formulas and inc_eq < 1e-12
    criterion(5, ok, f"cumulant shift {worst_shift:.1e} (<1e-10), theta=0 identity {identity}, "
                     f"closed forms {formulas}, eps-family residual {inc_eq:.0e} (<1e-12)")
    assert ok


@pytest.mark.acceptance(6)
def test_moment_suite(criterion):
    models = {"merton": ZOO["merton"], "kou": ZOO["kou"], "nig": ZOO["nig"], "vg": ZOO["vg"]}
    worst = 0.0
    for k, m in enumerate(models.values()):
        L = simulate_model(m, TimeGrid.uniform(1.0, 1), N, 60 + k).terminal
        mom = m.moments()
        worst = max(worst, abs(z_mean(L, mom["mean"])), abs(z_var(L, mom["variance"])))
    u = np.linspace(-10, 10, 21)
    a, b = NIG(3.0, -1.0, 0.4, 0.02), NIG(3.0, -1.0, 0.9, -0.05)
    conv = np.max(np.abs(model_cf(a, 1.0, u) * model_cf(b, 1.0, u) - model_cf(nig_convolve(a, b), 1.0, u)))
    ok = worst < 4 and conv < 1e-12
    criterion(6, ok, f"max |z| mean/variance {worst:.2f} (<4) over {len(models)} models, "
                     f"NIG convolution cf {conv:.0e} (<1e-12)")
    assert ok


@pytest.mark.acceptance(7)
def test_transform_internals(criterion):
    points = {
        "call": [-1.6 + 0.7j, -2.0 + 0j, -1.2 - 3.0j, -3.5 + 1.5j, -1.05 + 10j],
        "put": [0.6 + 0.7j, 2.0 + 0j, 1.2 - 3.0j, 0.3 + 1.5j, 1.5 + 10j],
        "digital_call": [-0.6 + 0.7j, -2.0 + 0j, -0.2 - 3.0j, -1.3 + 1.5j, -0.5 + 10j],
        "digital_put": [0.6 + 0.7j, 2.0 + 0j, 1.2 - 3.0j, 0.3 + 1.5j, 1.5 + 10j],
    }
    lap = 0.0
    for kind, zs in points.items():
        p = PayoffSpec(kind, 1.3)
        lap = max(lap, max(abs(payoff_laplace(p, z) - numeric_laplace(p, z)) for z in zs))
    quad = QuadratureSpec(abs_tol=1e-10)
    shift, parity, digital = 0.0, 0.0, 0.0
    env = MarketEnv(0.05, 0.02, 100.0)
    for name in ("merton", "kou", "nig", "vg", "cgmy", "meixner"):
        m = risk_neutralize(ZOO[name], env)
        J = admissible_damping(m, PayoffSpec("call", 110.0))
        p1 = transform_price(m, env, 1.0, PayoffSpec("call", 110.0), QuadratureSpec(damping=max(J.lo + 0.1, -3.0)))
        p2 = transform_price(m, env, 1.0, PayoffSpec("call", 110.0), QuadratureSpec(damping=-1.1))
        shift = max(shift, abs(p1 - p2))
        for K in (80.0, 100.0, 125.0):
            C = transform_price(m, env, 0.5, PayoffSpec("call", K))
            P = transform_price(m, env, 0.5, PayoffSpec("put", K))
            parity = max(parity, abs(C - P - (100 * math.exp(-0.01) - K * math.exp(-0.025))))
            dc = transform_price(m, env, 0.5, PayoffSpec("digital_call", K))
            dp = transform_price(m, env, 0.5, PayoffSpec("digital_put", K))
            digital = max(digital, abs(dc + dp - math.exp(-0.025)))
    ok = lap < 1e-8 and shift < 10 * quad.abs_tol and parity < 1e-8 and digital < 1e-8
    criterion(7, ok, f"Laplace vs numeric {lap:.0e} (<1e-8, 20 points), damping shift {shift:.0e} (<1e-9), "
                     f"parity {parity:.0e}, digital complement {digital:.0e} (<1e-8)")
    assert ok


@pytest.mark.acceptance(8)
def test_calibration_round_trip(criterion):
    truth = risk_neutralize(NIG(6.0, -2.0, 0.4), ENV)
    quotes = synthetic_quotes(truth, ENV, [0.25, 0.5, 1.0], [80.0, 90.0, 100.0, 110.0, 120.0])
    start = {"alpha": 9.0, "beta": -3.0, "delta": 0.6}
    t0 = time.perf_counter()
    res = calibrate_smile("nig", quotes, ENV, start)
    elapsed = time.perf_counter() - t0
    rel = max(abs(getattr(res.params, k) / getattr(truth, k) - 1) for k in start)
    ok = len(quotes) == 15 and res.vol_rmse < 1e-4 and rel < 0.01 and elapsed < 120
    criterion(8, ok, f"15 quotes, vol RMSE {res.vol_rmse:.1e} (<1e-4), max param rel err {rel:.1e} (<1e-2), "
                     f"{elapsed:.0f}s (<120s)")
    assert ok


@pytest.mark.acceptance(9)
def test_mle_round_trip(criterion):
    truth = NIG(5.0, -1.0, 0.02, 0.0005)
    dt = 1 / 252
    L = simulate_nig(truth, TimeGrid(np.arange(5001) * dt), 1, 9).paths[0]
    t0 = time.perf_counter()
    res = fit_returns_mle("nig", ReturnSeries(np.diff(L), dt))
    elapsed = time.perf_counter() - t0
    z = {k: (getattr(res.params, k) - getattr(truth, k)) / res.stderr[k] for k in res.stderr}
    worst = max(abs(v) for v in z.values())
    ok = worst <= 3 and elapsed < 60
    criterion(9, ok, f"5000 returns, max |param - truth| / stderr {worst:.2f} (<=3), {elapsed:.1f}s (<60s)")
    assert ok


def _cli(args, threads):
    env = dict(os.environ, LEVY_QUANT_THREADS=str(threads))
    proc = subprocess.run([sys.executable, "-m", "levy_quant", *args, "--threads", str(threads)],
                          capture_output=True, env=env, check=True)
    return proc.stdout


@pytest.mark.acceptance(10)
def test_cli_determinism(criterion, tmp_path):
    env = MarketEnv(0.05, 0.0, 100.0)
    write_quotes(tmp_path / "q.csv", synthetic_quotes(risk_neutralize(BS(0.0, 0.25), env), env, [0.5, 1.0],
                                                      [90.0, 100.0, 110.0]))
    rng = np.random.default_rng(3)
    write_returns(tmp_path / "r.csv", ReturnSeries(0.01 * rng.standard_t(5, 300)))
    nig = ["--model", "nig", "--alpha", "15", "--beta", "-3", "--delta", "0.4", "--r", "0.05"]
    commands = {
        "price mc": ["price", *nig, "--k", "100", "--t", "1", "--method", "mc", "--seed", "42", "--n-paths", "50000"],
        "price pide": ["price", *nig, "--k", "100", "--t", "1", "--method", "pide", "--nx", "200", "--nt", "50"],
        "smile": ["smile", *nig, "--strikes", "90,100,110", "--maturities", "0.5,1"],
        "simulate": ["simulate", *nig, "--t", "1", "--steps", "12", "--n-paths", "20000", "--seed", "7"],
        "calibrate": ["calibrate", "--model", "bs", "--sigma", "0.4", "--r", "0.05", "--quotes",
                      str(tmp_path / "q.csv"), "--seed", "3"],
        "fit-returns": ["fit-returns", "--model", "nig", "--returns", str(tmp_path / "r.csv")],
        "classify": ["classify", *nig],
    }
    mismatched = []
    for name, args in commands.items():
        outs = {t: _cli(args, t) for t in (1, 4, 8)}
        if not (outs[1] == outs[4] == outs[8]) or not outs[1]:
            mismatched.append(name)
    ok = not mismatched
    criterion(10, ok, f"{len(commands)} commands x threads 1/4/8 byte-identical"
                      + (f"; differing: {', '.join(mismatched)}" if mismatched else ""))
    assert ok
