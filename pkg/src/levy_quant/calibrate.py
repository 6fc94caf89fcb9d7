"""Calibration to implied-vol quotes and maximum-likelihood fits to return series.

The smile objective lives in volatility space: sum_i w_i (sigma_model,i - sigma_i)^2,
with model prices from the transform engine and the drift always fixed by the
martingale condition.  Return series are fitted by maximising the closed-form
increment log-density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import optimize, special

from .errors import ArbitrageViolation, DegenerateData, EmptyIntersection, LevyError, NonConvergence, \
    ParameterMismatch, StripViolation
from .marketdata import ReturnSeries, VolQuote, load_quotes, load_returns, write_quotes, write_returns  # noqa: F401
from .measure_change import MarketEnv, risk_neutralize
from .model_zoo import BS, FAMILIES, GH, NIG, ModelParams
from .price_transform import QuadratureSpec, price_smile

PENALTY = 1e6
MAX_EVALS = 2000
NEWTON_STEPS = 3  # finite-difference Newton polish after the likelihood optimisers

DEFAULT_BOUNDS = {
    "bs": {"sigma": (1e-4, 5.0)},
    "merton": {"sigma": (1e-4, 3.0), "lam": (0.0, 20.0), "mu_j": (-2.0, 2.0), "sigma_j": (1e-4, 2.0)},
    "kou": {"sigma": (1e-4, 3.0), "lam": (0.0, 20.0), "p": (0.0, 1.0), "theta1": (1.0 + 1e-3, 100.0),
            "theta2": (1e-3, 100.0)},
    "vg": {"sigma": (1e-4, 3.0), "theta": (-2.0, 2.0), "kappa": (1e-4, 10.0)},
    "nig": {"alpha": (1e-3, 100.0), "beta": (-100.0, 100.0), "delta": (1e-4, 10.0)},
    "gh": {"alpha": (1e-3, 100.0), "beta": (-100.0, 100.0), "delta": (1e-4, 10.0), "lam": (-10.0, 10.0)},
    "cgmy": {"C": (1e-4, 50.0), "G": (1e-3, 100.0), "M": (1.0 + 1e-3, 100.0), "Y": (0.0, 1.95)},
    "meixner": {"alpha": (1e-3, 10.0), "beta": (-3.1, 3.1), "delta": (1e-3, 50.0)},
}


# ---------------------------------------------------------------------------
# Black-Scholes quoting convention
# ---------------------------------------------------------------------------


def bs_price(env: MarketEnv, T: float, K: float, sigma: float, kind: str = "call") -> float:
    """Black-Scholes price with continuous dividend yield; sigma = 0 gives discounted intrinsic value."""
    if kind not in ("call", "put"):
        raise ValueError("kind must be 'call' or 'put'")
    if not (T > 0 and K > 0 and sigma >= 0):
        raise ValueError("need T > 0, K > 0, sigma >= 0")
    fwd = env.S0 * math.exp(-env.div * T)
    disc = K * math.exp(-env.r * T)
    sign = 1.0 if kind == "call" else -1.0
    if sigma == 0:
        return max(sign * (fwd - disc), 0.0)
    sd = sigma * math.sqrt(T)
    d1 = (math.log(fwd / disc) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    return sign * (fwd * special.ndtr(sign * d1) - disc * special.ndtr(sign * d2))


def bs_vega(env: MarketEnv, T: float, K: float, sigma: float) -> float:
    fwd = env.S0 * math.exp(-env.div * T)
    sd = sigma * math.sqrt(T)
    d1 = (math.log(fwd / (K * math.exp(-env.r * T))) + 0.5 * sd * sd) / sd
    return fwd * math.sqrt(T) * math.exp(-0.5 * d1 * d1) / math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class ImpliedVol:
    sigma: float
    at_lower_bound: bool
    iterations: int


def implied_vol(env: MarketEnv, T: float, K: float, price: float, kind: str = "call",
                tol: float = 1e-10, full_output: bool = False):
    """Black-Scholes implied volatility by Newton steps safeguarded with bisection.

    A price on the lower no-arbitrage bound returns sigma = 0 with
    ``at_lower_bound`` set (visible through ``full_output``).
    """
    lo = bs_price(env, T, K, 0.0, kind)
    hi = env.S0 * math.exp(-env.div * T) if kind == "call" else K * math.exp(-env.r * T)
    if not lo - tol <= price < hi:
        raise ArbitrageViolation(f"{kind} price {price!r} outside the no-arbitrage interval [{lo!r}, {hi!r})",
                                 price=price, lower=lo, upper=hi)
    if price <= lo + tol:
        res = ImpliedVol(0.0, True, 0)
        return res if full_output else res.sigma
    a, b = 0.0, 1.0
    while bs_price(env, T, K, b, kind) < price:
        a, b = b, 2 * b
        if b > 1e4:
            raise NonConvergence("implied volatility above 1e4", price=price)
    fwd = env.S0 * math.exp(-env.div * T)
    s = min(max(math.sqrt(2 * abs(math.log(fwd / K) + env.r * T) / T), 0.05), b) if a == 0 else 0.5 * (a + b)
    for it in range(1, 200):
        diff = bs_price(env, T, K, s, kind) - price
        if abs(diff) < tol:
            break
        if diff > 0:
            b = s
        else:
            a = s
        vega = bs_vega(env, T, K, s)
        step = s - diff / vega if vega > 0 else math.nan
        s = step if a < step < b else 0.5 * (a + b)
        if b - a < 1e-15 * max(b, 1.0):
            break
    else:
        raise NonConvergence("implied volatility iteration did not converge", price=price)
    res = ImpliedVol(s, False, it)
    return res if full_output else res.sigma


# ---------------------------------------------------------------------------
# Smile calibration
# ---------------------------------------------------------------------------


@dataclass
class CalibrationResult:
    params: ModelParams
    vol_rmse: float
    iterations: int
    restarts_used: int
    history: list[float] = field(repr=False)
    residuals: list[dict] = field(repr=False)


def _free_names(cls) -> list[str]:
    return [f.name for f in fields(cls) if f.name != "mu"]


class _SmileObjective:
    def __init__(self, cls, quotes, env, names, lo, hi, quad):
        self.cls, self.env, self.names, self.quad = cls, env, names, quad
        self.lo, self.hi = lo, hi
        self.quotes = [q for q in quotes if q.weight > 0]
        self.by_T = {}
        for i, q in enumerate(self.quotes):
            self.by_T.setdefault(q.T, []).append(i)
        self.target = np.array([q.implied_vol for q in self.quotes])
        self.w = np.array([q.weight for q in self.quotes])
        self.n_evals = 0
        self.best = math.inf
        self.history: list[float] = []

    def model(self, x) -> ModelParams:
        p = self.lo + np.clip(x, 0.0, 1.0) * (self.hi - self.lo)
        return risk_neutralize(self.cls(mu=0.0, **dict(zip(self.names, map(float, p)))), self.env)

    def model_vols(self, model) -> np.ndarray:
        vols = np.empty(len(self.quotes))
        for T, idx in self.by_T.items():
            strikes = [self.quotes[i].K for i in idx]
            prices = price_smile(model, self.env, [T], strikes, "call", self.quad)[0]
            for i, K, p in zip(idx, strikes, prices):
                vols[i] = implied_vol(self.env, T, K, float(p), "call", tol=1e-12)
        return vols

    def _penalty(self, x, exc) -> float:
        if isinstance(exc, StripViolation) and "strip" in exc.context:
            lo, hi = exc.context["strip"]
            dist = max(1.0 - hi, lo - 1.0, 0.0)
        else:
            dist = 1.0
        return PENALTY + dist + float(np.sum(np.abs(x - np.clip(x, 0, 1))))

    def __call__(self, x) -> float:
        self.n_evals += 1
        try:
            model = self.model(x)
            val = float(self.w @ (self.model_vols(model) - self.target) ** 2)
        except (ValueError, StripViolation, EmptyIntersection, ArbitrageViolation) as exc:
            val = self._penalty(np.asarray(x), exc)
        except LevyError as exc:
            val = self._penalty(np.asarray(x), exc)
        if val < self.best:
            self.best = val
        self.history.append(self.best)
        return val


def calibrate_smile(family, quotes, env: MarketEnv, init, bounds: dict | None = None, seed: int = 0,
                    restarts: int = 3, max_evals: int = MAX_EVALS,
                    quad: QuadratureSpec = QuadratureSpec()) -> CalibrationResult:
    """Fit a model family to implied-vol quotes by bounded Nelder-Mead.

    Parameters
    ----------
    family : str or ModelParams subclass
    quotes : list of VolQuote
    init : ModelParams or dict
        Starting point for the free parameters (everything except ``mu``).
    bounds : dict, optional
        name -> (lo, hi); defaults per family.
    restarts : int
        Extra runs from the incumbent with a randomly oriented simplex; they stop
        once a run fails to improve the objective.
    """
    cls = FAMILIES[family.lower()] if isinstance(family, str) else family
    names = _free_names(cls)
    if len([q for q in quotes if q.weight > 0]) < len(names):
        raise ParameterMismatch(f"{len(quotes)} quotes cannot identify {len(names)} parameters")
    b = dict(DEFAULT_BOUNDS[cls.family])
    b.update(bounds or {})
    lo = np.array([b[n][0] for n in names], dtype=float)
    hi = np.array([b[n][1] for n in names], dtype=float)
    start = init.to_dict() if isinstance(init, ModelParams) else dict(init)
    p0 = np.array([float(start[n]) for n in names])
    if np.any(p0 < lo) or np.any(p0 > hi):
        raise ValueError("initial parameters outside the bounds")
    obj = _SmileObjective(cls, quotes, env, names, lo, hi, quad)
    x0 = (p0 - lo) / (hi - lo)
    d = len(names)
    rng = np.random.default_rng(seed)
    opts = {"xatol": 1e-9, "fatol": 1e-15, "maxfev": max_evals, "adaptive": d > 3}
    box = optimize.Bounds(np.zeros(d), np.ones(d))

    def simplex(center, step, rotate):
        dirs = np.eye(d)
        if rotate:
            dirs = np.linalg.qr(rng.standard_normal((d, d)))[0]
        pts = [center] + [np.clip(center + step * v, 0, 1) for v in dirs]
        # a clipped vertex can collapse onto the centre; mirror it instead
        for k in range(1, d + 1):
            if np.allclose(pts[k], center):
                pts[k] = np.clip(center - step * dirs[k - 1], 0, 1)
        return np.array(pts)

    res = optimize.minimize(obj, x0, method="Nelder-Mead", bounds=box,
                            options={**opts, "initial_simplex": simplex(x0, 0.05, False)})
    best_x, best_f = res.x, res.fun
    exhausted = [res.status != 0]
    used = 0
    for _ in range(restarts):
        used += 1
        res = optimize.minimize(obj, best_x, method="Nelder-Mead", bounds=box,
                                options={**opts, "initial_simplex": simplex(best_x, 0.02, True)})
        exhausted.append(res.status != 0)
        improved = res.fun < best_f - 1e-14
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
        if not improved:
            break
    if all(exhausted):
        raise NonConvergence(f"Nelder-Mead used {max_evals} evaluations on every run", evaluations=obj.n_evals)
    if best_f >= PENALTY:
        raise EmptyIntersection("no parameter point inside the bounds satisfies the martingale condition")
    model = obj.model(best_x)
    vols = obj.model_vols(model)
    w = obj.w
    rmse = math.sqrt(float(w @ (vols - obj.target) ** 2) / float(w.sum()))
    resid = [{"maturity_years": q.T, "strike": q.K, "market_vol": q.implied_vol, "model_vol": float(v),
              "weight": q.weight} for q, v in zip(obj.quotes, vols)]
    return CalibrationResult(model, rmse, obj.n_evals, used, obj.history, resid)


def synthetic_quotes(model: ModelParams, env: MarketEnv, maturities, strikes,
                     quad: QuadratureSpec = QuadratureSpec()) -> list[VolQuote]:
    """Implied-vol quotes generated from transform prices of a risk-neutral model."""
    out = []
    prices = price_smile(model, env, maturities, strikes, "call", quad)
    for i, T in enumerate(maturities):
        for j, K in enumerate(strikes):
            out.append(VolQuote(float(T), float(K), implied_vol(env, T, K, float(prices[i, j]), "call", tol=1e-13)))
    return out


# ---------------------------------------------------------------------------
# Maximum likelihood on return series
# ---------------------------------------------------------------------------


@dataclass
class MleResult:
    params: ModelParams
    loglik: float
    stderr: dict
    cov: np.ndarray = field(repr=False)
    qq: np.ndarray = field(repr=False)  # columns: empirical quantile, model quantile
    iterations: int = 0


def _moments(x):
    m = float(np.mean(x))
    v = float(np.var(x))
    s = float(np.mean((x - m) ** 3)) / v**1.5
    k = float(np.mean((x - m) ** 4)) / v**2 - 3.0
    return m, v, s, k


def nig_moment_init(x, dt: float) -> NIG:
    """Method-of-moments NIG whose time-dt increment matches mean, variance, skewness and excess kurtosis."""
    m, v, s, k = _moments(x)
    k = max(k, 0.1, 4 * s * s / 3 * 1.05)
    rho2 = s * s / (3 * k - 4 * s * s)
    rho = math.copysign(math.sqrt(min(rho2, 0.81)), s)
    dg = 3 * (1 + 4 * rho * rho) / k  # delta_dt * gamma
    gamma = math.sqrt(dg / (v * (1 - rho * rho)))
    alpha = gamma / math.sqrt(1 - rho * rho)
    beta = rho * alpha
    d_dt = dg / gamma
    return NIG(alpha, beta, d_dt / dt, (m - d_dt * beta / gamma) / dt)


_SPECS = {
    # natural parameter names, map from unconstrained theta, inverse map
    "bs": (("mu", "sigma"),
           lambda t: (t[0], math.exp(t[1])),
           lambda p: (p[0], math.log(p[1]))),
    "nig": (("alpha", "beta", "delta", "mu"),
            lambda t: (math.hypot(math.exp(t[0]), t[1]), t[1], math.exp(t[2]), t[3]),
            lambda p: (0.5 * math.log(p[0] ** 2 - p[1] ** 2), p[1], math.log(p[2]), p[3])),
    "gh": (("alpha", "beta", "delta", "mu", "lam"),
           lambda t: (math.hypot(math.exp(t[0]), t[1]), t[1], math.exp(t[2]), t[3], t[4]),
           lambda p: (0.5 * math.log(p[0] ** 2 - p[1] ** 2), p[1], math.log(p[2]), p[3], p[4])),
}


def _logpdf(family: str, params: ModelParams, x, dt: float):
    t = 1.0 if family == "gh" else dt
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.log(params.density(x, t))


def _steps(p, rel):
    return rel * np.maximum(np.abs(p), 1e-3 * max(np.max(np.abs(p)), 1e-8))


def _gradient(f, p, rel=1e-4):
    p = np.asarray(p, dtype=float)
    h = _steps(p, rel)
    e = np.eye(p.size) * h
    return np.array([(f(p + e[i]) - f(p - e[i])) / (2 * h[i]) for i in range(p.size)])


def _hessian(f, p, rel=1e-4):
    """Central-difference Hessian with steps proportional to |p|."""
    p = np.asarray(p, dtype=float)
    h = _steps(p, rel)
    n = p.size
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei, ej = np.eye(n)[i] * h[i], np.eye(n)[j] * h[j]
            val = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return H


def _model_quantiles(params, family, dt, probs, center, scale, lo, hi):
    # sinh-spaced grid: resolution `scale` near the centre, geometric in the tails
    reach = max(center - lo, hi - center, scale)
    u = np.linspace(-np.arcsinh(reach / scale), np.arcsinh(reach / scale), 40001)
    grid = center + scale * np.sinh(u)
    pdf = np.nan_to_num(np.exp(_logpdf(family, params, grid, dt)))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    cdf = np.maximum.accumulate(cdf)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(probs, cdf[keep], grid[keep])


def fit_returns_mle(family: str, series: ReturnSeries, init: ModelParams | None = None,
                    max_iter: int = 5000) -> MleResult:
    """Maximum-likelihood fit of the increment law to a return series.

    NIG and BS parameters are annualised: the increment over ``series.dt`` has
    density ``model.density(x, t=dt)``.  GH has no closed-form density at
    other horizons, so its parameters describe the per-observation law directly.
    """
    family = family.lower()
    if family not in _SPECS:
        raise ValueError("fit_returns_mle supports 'nig', 'gh' and 'bs'")
    x = series.returns
    if x.size < 30:
        raise DegenerateData(f"need at least 30 returns, got {x.size}", n=int(x.size))
    if not np.var(x) > 0:
        raise DegenerateData("returns have zero variance")
    names, to_nat, to_theta = _SPECS[family]
    cls = FAMILIES[family]
    dt = series.dt
    if init is None:
        if family == "bs":
            init = BS(float(np.mean(x)) / dt, float(np.std(x, ddof=1)) / math.sqrt(dt))
        elif family == "nig":
            init = nig_moment_init(x, dt)
        else:
            nig = fit_returns_mle("nig", series).params
            init = GH(nig.alpha, nig.beta, nig.delta * dt, nig.mu * dt, -0.5)
    n = x.size

    def nll_nat(p):
        try:
            model = cls(**dict(zip(names, map(float, p))))
            ll = _logpdf(family, model, x, dt)
        except (ValueError, LevyError):
            return math.inf
        total = -math.fsum(ll.tolist())
        return total if math.isfinite(total) else math.inf

    def nll_theta(z):
        try:
            return nll_nat(to_nat(z * scale)) / n
        except (OverflowError, ValueError):
            return math.inf

    # the location coordinate is optimised in units of one return standard deviation
    scale = np.ones(len(names))
    scale[names.index("mu")] = float(np.std(x)) / (1.0 if family == "gh" else dt)
    theta0 = np.array(to_theta([getattr(init, k) for k in names]), dtype=float) / scale
    res = optimize.minimize(nll_theta, theta0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": max_iter, "maxfev": 2 * max_iter,
                                     "adaptive": True})
    res2 = optimize.minimize(nll_theta, res.x, method="BFGS", options={"gtol": 1e-11, "maxiter": max_iter})
    best = res2 if res2.fun <= res.fun else res
    if not np.isfinite(best.fun):
        raise NonConvergence("likelihood is not finite at any visited point")
    if res.status == 1 and not res2.success and res2.fun > res.fun - 1e-12:
        raise NonConvergence("likelihood optimiser hit its iteration limit", iterations=int(res.nit))
    p_hat = np.array(to_nat(best.x * scale))
    H = _hessian(nll_nat, p_hat)
    # Newton polish with wide-step differences: the simplex and quasi-Newton runs
    # stop at the sqrt(machine epsilon) resolution of the likelihood.  Steps are
    # accepted on the Newton decrement g'H^{-1}g, which unlike the likelihood
    # itself is not swamped by rounding this close to the optimum.
    try:
        g = _gradient(nll_nat, p_hat)
        step = np.linalg.solve(H, g)
        for _ in range(NEWTON_STEPS):
            p_new = p_hat - step
            if not math.isfinite(nll_nat(p_new)):
                break
            g_new = _gradient(nll_nat, p_new)
            H_new = _hessian(nll_nat, p_new)
            step_new = np.linalg.solve(H_new, g_new)
            if not g_new @ step_new < g @ step:
                break
            p_hat, g, H, step = p_new, g_new, H_new, step_new
    except np.linalg.LinAlgError:
        pass
    model = cls(**dict(zip(names, map(float, p_hat))))
    try:
        cov = np.linalg.inv(H)
        se = np.sqrt(np.where(np.diag(cov) > 0, np.diag(cov), np.nan))
    except np.linalg.LinAlgError:
        cov = np.full((len(names), len(names)), np.nan)
        se = np.full(len(names), np.nan)
    xs = np.sort(x)
    probs = (np.arange(1, n + 1) - 0.5) / n
    if family == "bs":
        center, scale = model.mu * dt, model.sigma * math.sqrt(dt)
    elif family == "nig":
        center, scale = model.mu * dt, model.delta * dt
    else:
        center, scale = model.mu, model.delta
    spread = xs[-1] - xs[0]
    mq = _model_quantiles(model, family, dt, probs, center, scale, xs[0] - spread, xs[-1] + spread)
    return MleResult(model, -nll_nat(p_hat), dict(zip(names, map(float, se))), cov,
                     np.column_stack([xs, mq]), int(res.nit + res2.nit))
