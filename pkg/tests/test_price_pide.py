import math

import numpy as np
import pytest

from levy_quant.calibrate import bs_price
from levy_quant.errors import ArbitrageViolation, CFLViolation, InvalidGrid
from levy_quant.levy_core import NormalJumps
from levy_quant.measure_change import MarketEnv, risk_neutralize
from levy_quant.model_zoo import BS, Merton
from levy_quant.price_pide import PideGrid, solve_pide
from levy_quant.price_transform import PayoffSpec, transform_price

from conftest import risk_neutral

ENV = MarketEnv(0.05, 0.0, 100.0)
CALL = PayoffSpec("call", 100.0)


def rel(a, b):
    return abs(a - b) / abs(b)


class TestGrid:
    @pytest.mark.parametrize("kw", [dict(x_min=0.1, x_max=1.0), dict(x_min=-1, x_max=1, n_x=2),
                                    dict(x_min=-1, x_max=1, theta=1.5), dict(x_min=-1, x_max=1, eps_jump=2.0),
                                    dict(x_min=-1, x_max=1, n_t=0)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidGrid):
            PideGrid(**kw)

    def test_for_model(self):
        g = PideGrid.for_model(BS(0.0, 0.2), 4.0, n_std=5.0)
        assert g.x_max == pytest.approx(5 * 0.2 * 2) and g.x_min == -g.x_max


class TestBlackScholes:
    def test_closed_form(self):
        m = risk_neutralize(BS(0.0, 0.2), ENV)
        res = solve_pide(m, ENV, 1.0, CALL, PideGrid(-1.0, 1.0, 400, 200))
        assert rel(res.price, bs_price(ENV, 1.0, 100.0, 0.2, "call")) < 5e-3

    def test_terminal_slice(self):
        m = risk_neutralize(BS(0.0, 0.2), ENV)
        res = solve_pide(m, ENV, 0.5, CALL, PideGrid(-1.0, 1.0, 101, 20))
        assert res.t[-1] == 0.5 and res.t[0] == pytest.approx(0.0, abs=1e-15)
        assert np.array_equal(res.surface[-1], CALL.value(100.0 * np.exp(res.x)))

    def test_digital_with_dividend(self):
        env = MarketEnv(0.05, 0.03, 100.0)
        m = risk_neutralize(BS(0.0, 0.25), env)
        p = PayoffSpec("digital_call", 95.0)
        res = solve_pide(m, env, 1.0, p, PideGrid(-1.5, 1.5, 400, 200))
        assert rel(res.price, transform_price(m, env, 1.0, p)) < 1e-2


class TestMerton:
    def model(self, lam=1.0):
        return risk_neutralize(Merton(0.0, 0.15, lam, -0.1, 0.15), ENV)

    def test_against_transform(self):
        m = self.model()
        res = solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0))
        assert rel(res.price, transform_price(m, ENV, 1.0, CALL)) < 1e-2
        # the centre cell |z| < h/2 is dropped: a zero-size jump leaves f unchanged
        h = res.x[1] - res.x[0]
        kept = 1.0 - NormalJumps(-0.1, 0.15).interval_mass(-h / 2, h / 2)
        assert res.eps_sensitivity is None and res.jump_intensity == pytest.approx(kept, rel=1e-12)

    def test_refinement(self):
        m = self.model()
        ref = transform_price(m, ENV, 1.0, CALL)
        coarse = solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0, n_x=400, n_t=200))
        fine = solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0, n_x=800, n_t=400))
        assert abs(coarse.price - ref) / abs(fine.price - ref) >= 1.5

    def test_parity(self):
        m = self.model()
        grid = PideGrid.for_model(m, 1.0)
        K = 110.0
        C = solve_pide(m, ENV, 1.0, PayoffSpec("call", K), grid).price
        P = solve_pide(m, ENV, 1.0, PayoffSpec("put", K), grid).price
        err = abs(C - transform_price(m, ENV, 1.0, PayoffSpec("call", K)))
        assert abs(C - P - (100.0 - K * math.exp(-0.05))) <= 2 * max(err, 1e-6)

    def test_vanishing_intensity(self):
        grid = PideGrid(-1.2, 1.2, 400, 200)
        jump = solve_pide(self.model(1e-6), ENV, 1.0, CALL, grid).price
        plain = solve_pide(risk_neutralize(BS(0.0, 0.15), ENV), ENV, 1.0, CALL, grid).price
        assert abs(jump - plain) < 1e-3

    def test_maximum_principle(self):
        m = self.model(3.0)
        res = solve_pide(m, ENV, 1.0, PayoffSpec("put", 90.0), PideGrid.for_model(m, 1.0, n_x=200, n_t=50))
        assert res.surface.min() >= -1e-10

    def test_cfl(self):
        m = risk_neutralize(Merton(0.0, 0.15, 50.0, -0.01, 0.02), ENV)
        with pytest.raises(CFLViolation):
            solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0, n_t=10))


class TestInfiniteActivity:
    @pytest.mark.parametrize("name", ["nig", "vg", "cgmy", "meixner", "kou"])
    def test_against_transform(self, name):
        m = risk_neutral(name, ENV)
        res = solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0))
        assert rel(res.price, transform_price(m, ENV, 1.0, CALL)) < 1e-2

    def test_eps_check(self):
        m = risk_neutral("nig", ENV)
        res = solve_pide(m, ENV, 1.0, CALL, PideGrid.for_model(m, 1.0, eps_jump=0.05))
        assert res.eps_used > 0 and res.small_jump_variance > 0
        assert res.eps_sensitivity is not None and res.eps_sensitivity < 1e-2


def test_requires_martingale():
    with pytest.raises(ArbitrageViolation):
        solve_pide(BS(0.2, 0.2), ENV, 1.0, CALL, PideGrid(-1, 1, 50, 10))


def test_surface_csv(tmp_path):
    m = risk_neutralize(BS(0.0, 0.2), ENV)
    res = solve_pide(m, ENV, 1.0, CALL, PideGrid(-1.0, 1.0, 11, 4))
    res.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,t,f" and len(lines) == 1 + 11 * 5
