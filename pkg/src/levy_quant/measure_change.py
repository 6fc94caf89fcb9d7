"""Risk-neutral drift, Esscher transforms, and closed-form market prices of risk."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import DegenerateCase, NoRoot, NonConvergence, StripViolation
from .levy_core import Convention, LevyMeasure, LevyTriplet, _exp_remainder_scalar
from .model_zoo import BS, CGMY, GH, NIG, VG, Kou, Merton, Meixner, ModelParams

# Infinite strip ends are capped here when bracketing the Esscher parameter.
STRIP_CAP = 100.0
N_SCAN = 65


@dataclass(frozen=True)
class MarketEnv:
    """Flat market: domestic rate ``r``, dividend or foreign rate ``div``, spot ``S0``."""

    r: float
    div: float = 0.0
    S0: float = 1.0

    def __post_init__(self):
        if not self.S0 > 0:
            raise ValueError("S0 must be > 0")
        if not (self.r >= 0 and self.div >= 0):
            raise ValueError("r and div must be >= 0")

    @property
    def carry(self) -> float:
        return self.r - self.div


@dataclass(frozen=True)
class EsscherParams:
    alpha_jump: float = 0.0
    beta_cont: float = 0.0


def _convexity_integral(nu: LevyMeasure) -> float:
    """int (e^x - 1 - x) nu(dx)."""
    if not nu.tail_exp_moment_finite(1.0):
        raise StripViolation("risk-neutral drift needs a finite first exponential moment")
    return nu.integrate(lambda x: _exp_remainder_scalar(complex(x)).real, tol=1e-13)


def risk_neutral_drift(c: float, nu: LevyMeasure, env: MarketEnv) -> float:
    """Drift (compensate-all convention) making e^{-(r-div)t} S_t a martingale."""
    return env.carry - 0.5 * c - _convexity_integral(nu)


def martingale_residual(triplet: LevyTriplet, env: MarketEnv, method: str = "auto") -> float:
    """b - (r - div - c/2 - int (e^x - 1 - x) nu(dx)); zero iff the discounted asset is a martingale.

    With a closed-form exponent this equals kappa(1) - (r - div) exactly;
    ``method="quadrature"`` integrates the Lévy measure instead.
    """
    t = triplet.to_convention(Convention.COMPENSATE_ALL)
    if not t.exp_moment_finite(1.0):
        raise StripViolation("martingale condition needs a finite first exponential moment")
    if method == "auto" and t.closed_form is not None:
        return float(np.real(t.closed_form(np.array(-1j)))) - env.carry
    return t.b - risk_neutral_drift(t.c, t.nu, env)


def cumulant_of(params: ModelParams, z):
    """kappa(z) = log E[e^{z L_1}] from the closed-form exponent (no strip check)."""
    val = params.exponent(-1j * np.asarray(z, dtype=float))
    return np.real(val) if np.ndim(val) else float(np.real(val))


def risk_neutralize(params: ModelParams, env: MarketEnv) -> ModelParams:
    """Return ``params`` with ``mu`` shifted so that kappa(1) = r - div."""
    if not params.strip().contains(1.0):
        raise StripViolation(f"{params.family}: 1 is outside the exponential-moment strip",
                             strip=[params.strip().lo, params.strip().hi])
    shift = env.carry - cumulant_of(params, 1.0)
    return params.with_mu(params.mu + shift)


# ---------------------------------------------------------------------------
# Esscher transform
# ---------------------------------------------------------------------------


def _check_tilt(triplet: LevyTriplet, alpha: float) -> None:
    strip = triplet.strip
    if alpha == 0:
        return
    if strip is not None:
        if not strip.interior(alpha):
            raise StripViolation("Esscher tilt must lie strictly inside the exponential strip", alpha=alpha)
    elif not triplet.exp_moment_finite(alpha):
        raise StripViolation("Esscher tilt outside the exponential strip", alpha=alpha)


def esscher_transform(triplet: LevyTriplet, e: EsscherParams) -> LevyTriplet:
    """Tilt jumps by e^{alpha x} and shift the drift by beta c + int x (e^{alpha x} - 1) nu(dx).

    The drift correction uses the truncation of the input's convention.  When
    the input carries a closed-form exponent the output does too:
    psi_bar(u) = iu(b + beta c) - cu^2/2 + j(u - i alpha) - j(-i alpha),
    with j the compensated jump part of psi.
    """
    alpha, beta = float(e.alpha_jump), float(e.beta_cont)
    _check_tilt(triplet, alpha)
    if alpha == 0 and beta == 0:
        return triplet
    nu_bar = triplet.nu.tilt(alpha)
    if triplet.convention == Convention.COMPENSATE_ALL:
        shift = triplet.nu.integrate(lambda x: x * math.expm1(alpha * x), tol=1e-13)
    else:
        shift = triplet.nu.integrate(lambda x: x * math.expm1(alpha * x), -1.0, 1.0, tol=1e-13)
        # |x| = 1 is not compensated under the unit truncation
        shift -= triplet.nu.integrate(lambda x: x * math.expm1(alpha * x) * (abs(x) == 1.0), -1.0, 1.0)
    b_bar = triplet.b + beta * triplet.c + shift
    closed = None
    if triplet.closed_form is not None:
        ca = triplet.to_convention(Convention.COMPENSATE_ALL) if triplet.convention != Convention.COMPENSATE_ALL \
            else triplet
        psi, b0, c = triplet.closed_form, ca.b, triplet.c
        jump = lambda v: psi(v) - 1j * v * b0 + 0.5 * c * v * v  # noqa: E731
        j0 = jump(np.array(-1j * alpha))

        def closed(u, _j=jump, _j0=j0, _b=b0 + beta * c, _c=c, _a=alpha):
            u = np.asarray(u, dtype=complex)
            return 1j * u * _b - 0.5 * _c * u * u + _j(u - 1j * _a) - _j0

    return LevyTriplet(b_bar, triplet.c, nu_bar, triplet.convention, closed)


def esscher_params(params: ModelParams, theta: float) -> ModelParams:
    """Same family after the Esscher tilt with alpha_jump = beta_cont = theta.

    Shape parameters map in closed form; ``mu`` is then fixed by matching the
    tilted exponent psi(u - i theta) - psi(-i theta) at u = 1.
    """
    strip = params.strip()
    if not strip.interior(theta):
        raise StripViolation("Esscher parameter must lie strictly inside the strip", theta=theta)
    if theta == 0:
        return params
    if isinstance(params, BS):
        mapped = params
    elif isinstance(params, Merton):
        s2 = params.sigma_j**2
        mapped = replace(params, lam=params.lam * math.exp(theta * params.mu_j + 0.5 * theta**2 * s2),
                         mu_j=params.mu_j + theta * s2)
    elif isinstance(params, Kou):
        wp = params.p * params.theta1 / (params.theta1 - theta)
        wn = (1 - params.p) * params.theta2 / (params.theta2 + theta)
        mapped = replace(params, lam=params.lam * (wp + wn), p=wp / (wp + wn),
                         theta1=params.theta1 - theta, theta2=params.theta2 + theta)
    elif isinstance(params, (NIG, GH)):
        mapped = replace(params, beta=params.beta + theta)
    elif isinstance(params, CGMY):
        mapped = replace(params, G=params.G + theta, M=params.M - theta)
    elif isinstance(params, VG):
        G, M = params.rates
        G, M = G + theta, M - theta
        mapped = replace(params, theta=(1 / M - 1 / G) / params.kappa,
                         sigma=math.sqrt(2.0 / (params.kappa * G * M)))
    elif isinstance(params, Meixner):
        mapped = replace(params, beta=params.beta + params.alpha * theta)
    else:
        raise TypeError(f"no Esscher map for {type(params).__name__}")
    target = params.exponent(np.array(1 - 1j * theta)) - params.exponent(np.array(-1j * theta))
    gap = target - mapped.exponent(np.array(1.0 + 0j))
    return mapped.with_mu(mapped.mu + float(np.real(gap / 1j)))


def esscher_martingale_parameter(params: ModelParams, env: MarketEnv, tol: float = 1e-12) -> float:
    """theta* with kappa(theta + 1) - kappa(theta) = r - div."""
    strip = params.strip()
    lo = max(strip.lo, -STRIP_CAP)
    hi = min(strip.hi - 1.0, STRIP_CAP)
    if not lo < hi:
        raise NoRoot("strip too narrow to contain theta and theta + 1", strip=[strip.lo, strip.hi])
    # Stay off open boundaries, where the exponent may blow up.
    pad = 1e-9 * (hi - lo)
    lo_s = lo if (strip.lo_closed and lo == strip.lo) else lo + pad
    hi_s = hi if (strip.hi_closed and hi == strip.hi - 1.0) else hi - pad

    def g(th):
        return cumulant_of(params, th + 1.0) - cumulant_of(params, th) - env.carry

    k = np.arange(N_SCAN)
    nodes = np.sort(0.5 * (lo_s + hi_s) + 0.5 * (hi_s - lo_s) * np.cos(np.pi * k / (N_SCAN - 1)))
    vals = np.array([g(x) for x in nodes])
    if np.any(vals == 0):
        return float(nodes[np.argmax(vals == 0)])
    sign_change = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(sign_change) == 0:
        raise NoRoot("kappa(theta+1) - kappa(theta) does not cross r - div inside the strip",
                     lo=lo_s, hi=hi_s, g_lo=float(vals[0]), g_hi=float(vals[-1]))
    i = sign_change[0]
    root = optimize.brentq(g, nodes[i], nodes[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(g(root)) > tol:
        raise NonConvergence("Esscher parameter residual above tolerance", residual=abs(g(root)))
    return float(root)


# ---------------------------------------------------------------------------
# Market price of risk
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlackScholesCase:
    b: float
    c: float


@dataclass(frozen=True)
class PoissonCase:
    b: float
    alpha: float
    lam: float


@dataclass(frozen=True)
class JumpDiffusionCase:
    b: float
    c: float
    alpha: float
    lam: float
    eps: float


@dataclass(frozen=True)
class MarketPriceOfRisk:
    """Solution (beta, Y) of the drift-matching equation and its checks.

    ``residual`` is 0 = b - r + c(beta + 1/2) + ((e^alpha - 1)Y - alpha) lambda
    evaluated at the solution; ``martingale_gap`` is the Girsanov drift
    b + c beta + alpha (Y - 1) lambda minus the martingale drift
    r - c/2 - (e^alpha - 1 - alpha) Y lambda.
    """

    beta: float | None
    Y: float | None
    residual: float
    martingale_gap: float


def _check_and_pack(b, c, alpha, lam, beta, Y, rate):
    beta_v = 0.0 if beta is None else beta
    Y_v = 1.0 if Y is None else Y
    jump = (math.expm1(alpha) * Y_v - alpha) * lam if lam else 0.0
    residual = b - rate + c * (beta_v + 0.5) + jump
    girsanov = b + c * beta_v + (alpha * (Y_v - 1) * lam if lam else 0.0)
    martingale = rate - 0.5 * c - ((math.expm1(alpha) - alpha) * Y_v * lam if lam else 0.0)
    return MarketPriceOfRisk(beta, Y, residual, girsanov - martingale)


def market_price_of_risk(case, env: MarketEnv) -> MarketPriceOfRisk:
    """Closed-form (beta, Y) for the three elementary models; r is read as r - div."""
    rate = env.carry
    if isinstance(case, BlackScholesCase):
        if case.c <= 0:
            raise DegenerateCase("Black-Scholes case needs c > 0", c=case.c)
        beta = (rate - case.b) / case.c - 0.5
        return _check_and_pack(case.b, case.c, 0.0, 0.0, beta, None, rate)
    if isinstance(case, PoissonCase):
        denom = math.expm1(case.alpha) * case.lam
        if denom == 0:
            raise DegenerateCase("Poisson case needs (e^alpha - 1) lambda != 0", alpha=case.alpha, lam=case.lam)
        Y = (rate - case.b + case.alpha * case.lam) / denom
        return _check_and_pack(case.b, 0.0, case.alpha, case.lam, None, Y, rate)
    if isinstance(case, JumpDiffusionCase):
        if case.c <= 0:
            raise DegenerateCase("jump-diffusion case needs c > 0", c=case.c)
        denom = math.expm1(case.alpha) * case.lam
        if denom == 0:
            raise DegenerateCase("jump-diffusion case needs (e^alpha - 1) lambda != 0")
        if not 0 < case.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        beta = case.eps * (rate - case.b) / case.c - 0.5
        Y = ((1 - case.eps) * (rate - case.b) + case.alpha * case.lam) / denom
        return _check_and_pack(case.b, case.c, case.alpha, case.lam, beta, Y, rate)
    raise TypeError("general (beta, Y) tuples are not supported; use one of the three closed-form cases")


__all__ = [
    "MarketEnv", "EsscherParams", "risk_neutral_drift", "martingale_residual", "risk_neutralize",
    "esscher_transform", "esscher_params", "esscher_martingale_parameter", "cumulant_of",
    "BlackScholesCase", "PoissonCase", "JumpDiffusionCase", "MarketPriceOfRisk", "market_price_of_risk",
]
