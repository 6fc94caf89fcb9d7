"""Monte Carlo prices from simulated exponential-Lévy paths.

Payoff values are reduced with ``math.fsum``, which is exact and therefore
independent of block order, so a seed fixes the result bit for bit whatever
the thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArbitrageViolation, StripViolation, UnsupportedModel
from .measure_change import MarketEnv
from .model_zoo import BS, ModelParams
from .price_transform import MARTINGALE_TOL, PayoffSpec
from .simulate import TimeGrid, simulate_model


@dataclass(frozen=True)
class McResult:
    price: float
    stderr: float
    ci95: tuple[float, float]
    n_paths: int
    seed: int

    def to_dict(self) -> dict:
        return {"price": self.price, "stderr": self.stderr, "ci95": list(self.ci95),
                "n_paths": self.n_paths, "seed": self.seed}

    def covers(self, value: float, n_stderr: float = 3.0) -> bool:
        return abs(value - self.price) <= n_stderr * self.stderr


@dataclass(frozen=True)
class AsianCall:
    """Arithmetic-average call over the monitoring dates t_1, ..., t_n (t_0 excluded)."""

    K: float

    def __call__(self, S: np.ndarray) -> np.ndarray:
        return np.maximum(S[:, 1:].mean(axis=1) - self.K, 0.0)


@dataclass(frozen=True)
class LookbackCall:
    """Fixed-strike lookback call on the discrete maximum over t_0, ..., t_n."""

    K: float

    def __call__(self, S: np.ndarray) -> np.ndarray:
        return np.maximum(S.max(axis=1) - self.K, 0.0)


def _summarise(values: np.ndarray, disc: float, seed: int) -> McResult:
    n = values.size
    mean = math.fsum(values.tolist()) / n
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1) if n > 1 else 0.0
    price = disc * mean
    se = disc * math.sqrt(var / n)
    return McResult(price, se, (price - 1.96 * se, price + 1.96 * se), n, seed)


def _check_model(model: ModelParams, env: MarketEnv, require_martingale: bool):
    if require_martingale:
        gap = float(np.real(model.exponent(np.array(-1j)))) - env.carry
        if abs(gap) > MARTINGALE_TOL:
            raise ArbitrageViolation("model drift is not risk-neutral", kappa_1_minus_carry=gap)
    if not model.simulable:
        raise UnsupportedModel(f"no exact sampler for {model.family}", family=model.family)


def _paths(model, grid: TimeGrid, n_paths: int, seed: int, antithetic: bool) -> np.ndarray:
    """Log-price paths; with ``antithetic`` row k + n_paths mirrors the Gaussian draws of row k."""
    L = simulate_model(model, grid, n_paths, seed).paths
    if not antithetic:
        return L
    if not isinstance(model, BS):
        raise UnsupportedModel("antithetic pairing is implemented for Gaussian (BS) draws only")
    # L_t = mu t + sigma W_t, so the mirrored path is 2 mu t - L_t.
    return np.vstack([L, 2.0 * model.mu * grid.times - L])


def _pair_average(values: np.ndarray, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return values
    n = values.size // 2
    return 0.5 * (values[:n] + values[n:])


def mc_price(model: ModelParams, env: MarketEnv, T: float, payoff: PayoffSpec | Callable, n_paths: int,
             seed: int, antithetic: bool = False, require_martingale: bool = True) -> McResult:
    """Discounted sample mean of g(S0 e^{L_T}).

    Parameters
    ----------
    payoff : PayoffSpec or callable
        A callable receives the array of terminal prices.
    antithetic : bool
        BS only; ``n_paths`` then counts antithetic pairs.
    """
    _check_model(model, env, require_martingale)
    if isinstance(payoff, PayoffSpec):
        if payoff.kind == "call" and not model.strip().contains(2.0):
            raise StripViolation("call payoff has infinite variance: E[S_T^2] is not finite under the model")
        g = payoff.value
    else:
        g = payoff
    grid = TimeGrid.uniform(T, 1)
    S = env.S0 * np.exp(_paths(model, grid, n_paths, seed, antithetic)[:, -1])
    values = _pair_average(np.asarray(g(S), dtype=float), antithetic)
    return _summarise(values, math.exp(-env.r * T), seed)


def mc_price_path(model: ModelParams, env: MarketEnv, grid: TimeGrid, payoff: Callable, n_paths: int,
                  seed: int, antithetic: bool = False, require_martingale: bool = True) -> McResult:
    """Discounted sample mean of a functional of the discrete price path.

    ``payoff`` maps an (n_paths, len(grid.times)) array of prices to payoff
    values.  Monitoring is on the grid only; no continuity correction is applied.
    """
    _check_model(model, env, require_martingale)
    S = env.S0 * np.exp(_paths(model, grid, n_paths, seed, antithetic))
    values = _pair_average(np.asarray(payoff(S), dtype=float), antithetic)
    return _summarise(values, math.exp(-env.r * grid.T), seed)
