import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levy_quant.calibrate import bs_price, implied_vol
from levy_quant.errors import ArbitrageViolation, EmptyIntersection, StripViolation, UnsupportedModel
from levy_quant.measure_change import MarketEnv, risk_neutralize
from levy_quant.model_zoo import BS, CGMY, NIG, Kou
from levy_quant.price_transform import (PayoffSpec, QuadratureSpec, admissible_damping, payoff_laplace,
                                        price_smile, select_damping, transform_price)

from conftest import ZOO, risk_neutral
from oracles import numeric_laplace

ENV = MarketEnv(0.05, 0.0, 100.0)
Z_POINTS = [-1.6 + 0.7j, -2.0 + 0j, -1.2 - 3.0j, -3.5 + 1.5j, -1.05 + 10j]


class TestPayoffLaplace:
    def test_values(self):
        assert payoff_laplace(PayoffSpec("call", 1.0), -2.0) == pytest.approx(0.5)
        assert payoff_laplace(PayoffSpec("call", 2.0), -1.5).real == pytest.approx(2**-0.5 / 0.75, rel=1e-14)

    @pytest.mark.parametrize("z", Z_POINTS)
    def test_call_numeric(self, z):
        p = PayoffSpec("call", 1.3)
        assert abs(payoff_laplace(p, z) - numeric_laplace(p, z)) < 1e-8

    @pytest.mark.parametrize("kind", ["put", "digital_put"])
    @pytest.mark.parametrize("z", [0.6 + 0.7j, 2.0, 1.2 - 3.0j, 0.3 + 1.5j, 1.5 + 10j])
    def test_put_side_numeric(self, kind, z):
        p = PayoffSpec(kind, 0.8)
        assert abs(payoff_laplace(p, z) - numeric_laplace(p, z)) < 1e-8

    @pytest.mark.parametrize("z", [-0.6 + 0.7j, -2.0, -0.2 - 3.0j, -1.3 + 1.5j, -0.5 + 10j])
    def test_digital_call_numeric(self, z):
        p = PayoffSpec("digital_call", 1.2)
        assert abs(payoff_laplace(p, z) - numeric_laplace(p, z)) < 1e-8

    def test_strip(self):
        with pytest.raises(StripViolation):
            payoff_laplace(PayoffSpec("call", 1.0), -0.5)
        with pytest.raises(ValueError):
            PayoffSpec("straddle", 1.0)


class TestDamping:
    def test_bs_default(self):
        assert select_damping(BS(0.0, 0.2), 1.0, PayoffSpec("call", 100)) == -1.25

    def test_kou_narrow(self):
        R = select_damping(Kou(0.0, 0.2, 1.0, 0.4, 1.5, 3.0), 1.0, PayoffSpec("call", 100))
        J = admissible_damping(Kou(0.0, 0.2, 1.0, 0.4, 1.5, 3.0), PayoffSpec("call", 100))
        assert (J.lo, J.hi) == (-1.5, -1.0)
        assert -1.5 + 0.05 * 0.5 <= R <= -1.0 - 0.05 * 0.5

    def test_empty(self):
        with pytest.raises(EmptyIntersection):
            select_damping(CGMY(1.0, 5.0, 0.9, 0.5), 1.0, PayoffSpec("call", 100))


class TestPrice:
    def test_bs_closed_form(self, env):
        m = risk_neutral("bs", env)
        p = transform_price(BS(0.05 - 0.02, 0.2), env, 1.0, PayoffSpec("call", 100))
        assert p == pytest.approx(10.450583572185565, abs=1e-6)
        assert transform_price(m, env, 1.0, PayoffSpec("call", 100)) == pytest.approx(
            bs_price(env, 1.0, 100.0, 0.2, "call"), abs=1e-8)

    @pytest.mark.parametrize("name", list(ZOO))
    def test_parity_and_digitals(self, name, env_div):
        m = risk_neutral(name, env_div)
        T, K = 0.75, 105.0
        C = transform_price(m, env_div, T, PayoffSpec("call", K))
        P = transform_price(m, env_div, T, PayoffSpec("put", K))
        fwd = env_div.S0 * math.exp(-env_div.div * T) - K * math.exp(-env_div.r * T)
        assert C - P == pytest.approx(fwd, abs=1e-8)
        dc = transform_price(m, env_div, T, PayoffSpec("digital_call", K))
        dp = transform_price(m, env_div, T, PayoffSpec("digital_put", K))
        assert dc + dp == pytest.approx(math.exp(-env_div.r * T), abs=1e-8)

    @pytest.mark.parametrize("name", ["merton", "nig", "vg", "cgmy"])
    def test_damping_invariance(self, name, env):
        m = risk_neutral(name, env)
        q = QuadratureSpec(abs_tol=1e-10)
        J = admissible_damping(m, PayoffSpec("call", 110))
        R1 = max(J.lo + 0.1, -3.0)
        R2 = -1.1
        p1 = transform_price(m, env, 1.0, PayoffSpec("call", 110), QuadratureSpec(damping=R1))
        p2 = transform_price(m, env, 1.0, PayoffSpec("call", 110), QuadratureSpec(damping=R2))
        assert abs(p1 - p2) < 10 * q.abs_tol

    def test_trapezoid_rule(self, env):
        m = risk_neutral("nig", env)
        a = transform_price(m, env, 1.0, PayoffSpec("call", 95))
        b = transform_price(m, env, 1.0, PayoffSpec("call", 95), QuadratureSpec(rule="trapezoid", u_max=400))
        assert a == pytest.approx(b, abs=1e-7)

    @given(st.floats(40, 250), st.floats(0.05, 3))
    def test_bounds(self, K, T):
        env = MarketEnv(0.03, 0.01, 100.0)
        m = risk_neutralize(ZOO["kou"], env)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            C = transform_price(m, env, T, PayoffSpec("call", K))
        fwd = 100 * math.exp(-0.01 * T)
        assert max(fwd - K * math.exp(-0.03 * T), 0) <= C <= fwd

    def test_not_risk_neutral(self, env):
        with pytest.raises(ArbitrageViolation):
            transform_price(BS(0.3, 0.2), env, 1.0, PayoffSpec("call", 100))

    def test_digital_needs_density(self):
        class NoDensity(BS):
            @property
            def has_density(self):
                return False
        with pytest.raises(UnsupportedModel):
            transform_price(NoDensity(0.03, 0.2), MarketEnv(0.05), 1.0, PayoffSpec("digital_call", 1.0))


class TestSmile:
    def test_cell_matches_single(self, env):
        m = risk_neutral("nig", env)
        grid = price_smile(m, env, [0.5, 1.0], [90.0, 100.0, 110.0])
        assert grid[1, 2] == pytest.approx(transform_price(m, env, 1.0, PayoffSpec("call", 110.0)), abs=1e-10)

    def test_monotone_in_strike(self, env):
        prices = price_smile(risk_neutral("bs", env), env, [1.0], np.linspace(60, 150, 10))[0]
        assert np.all(np.diff(prices) < 1e-10)

    def test_nig_skew(self, env):
        m = risk_neutralize(NIG(8.0, -3.0, 0.5), env)
        strikes = np.linspace(80, 120, 5)
        prices = price_smile(m, env, [1.0], strikes)[0]
        vols = [implied_vol(env, 1.0, K, p, "call") for K, p in zip(strikes, prices)]
        assert max(vols) - min(vols) > 1e-3
