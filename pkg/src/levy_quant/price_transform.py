"""European option prices by inverting the bilateral Laplace transform of the payoff.

With pi(x) = g(e^{-x}) and zeta = -log S0,

    price = e^{-rT + zeta R} / (2 pi) * int_R e^{i zeta u} L_pi(R + iu) phi_{L_T}(iR - u) du,

where R is a damping abscissa inside both the payoff strip and the (negated)
exponential-moment strip of the driving process.  The integrand is Hermitian
in u, so only u >= 0 is integrated.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ArbitrageViolation, EmptyIntersection, IntegrationFailure, QuadratureWarning, StripViolation, \
    UnsupportedModel
from .levy_core import Strip
from .measure_change import MarketEnv
from .model_zoo import ModelParams

KINDS = ("call", "put", "digital_call", "digital_put")
# Default damping per payoff, used when it sits inside the admissible interval.
PREFERRED_R = {"call": -1.25, "put": 0.25, "digital_call": -0.5, "digital_put": 0.5}
MARGIN = 0.05
FIRST_PANEL = 8.0
MARTINGALE_TOL = 1e-8


@dataclass(frozen=True)
class PayoffSpec:
    kind: str
    K: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"payoff kind must be one of {KINDS}")
        if not self.K > 0:
            raise ValueError("strike must be > 0")

    def value(self, S) -> np.ndarray:
        """Payoff g(S) at expiry; digitals pay 1 strictly beyond the strike."""
        S = np.asarray(S, dtype=float)
        if self.kind == "call":
            return np.maximum(S - self.K, 0.0)
        if self.kind == "put":
            return np.maximum(self.K - S, 0.0)
        if self.kind == "digital_call":
            return (S > self.K).astype(float)
        return (S < self.K).astype(float)

    @property
    def damping_strip(self) -> Strip:
        """Admissible Re(z) for the payoff transform (open interval)."""
        if self.kind == "call":
            return Strip(-math.inf, -1.0)
        if self.kind == "digital_call":
            return Strip(-math.inf, 0.0)
        return Strip(0.0, math.inf)


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "gauss_kronrod"  # or "trapezoid"
    abs_tol: float = 1e-10
    u_max: float = 2000.0
    damping: float | None = None
    n_trapezoid: int = 1 << 14

    def __post_init__(self):
        if self.rule not in ("gauss_kronrod", "trapezoid"):
            raise ValueError("rule must be 'gauss_kronrod' or 'trapezoid'")
        if not (self.abs_tol > 0 and self.u_max > 0):
            raise ValueError("abs_tol and u_max must be > 0")


def _laplace(kind: str, log_k, z):
    if kind in ("call", "put"):
        return np.exp((1 + z) * log_k) / (z * (z + 1))
    if kind == "digital_call":
        return -np.exp(z * log_k) / z
    return np.exp(z * log_k) / z


def payoff_laplace(payoff: PayoffSpec, z):
    """Bilateral Laplace transform of x -> g(e^{-x}) at z."""
    z = np.asarray(z, dtype=complex)
    strip = payoff.damping_strip
    if np.any(~np.vectorize(strip.contains)(z.real)):
        raise StripViolation(f"Re(z) outside the {payoff.kind} payoff strip", strip=[strip.lo, strip.hi])
    return _laplace(payoff.kind, math.log(payoff.K), z)


def admissible_damping(model: ModelParams, payoff: PayoffSpec) -> Strip:
    """Intersection of the payoff strip with {R : -R inside the moment strip}."""
    ms = model.strip()
    ps = payoff.damping_strip
    lo, hi = max(ps.lo, -ms.hi), min(ps.hi, -ms.lo)
    if not lo < hi:
        raise EmptyIntersection(f"no damping for {payoff.kind} under {model.family}: payoff strip "
                                f"({ps.lo}, {ps.hi}) and moment strip ({ms.lo}, {ms.hi}) do not overlap",
                                payoff_strip=[ps.lo, ps.hi], moment_strip=[ms.lo, ms.hi])
    return Strip(lo, hi)


def select_damping(model: ModelParams, T: float, payoff: PayoffSpec) -> float:
    """Damping R inside the admissible interval, at least 5% of its width from each end.

    Calls use max(-1.25, midpoint) and puts min(0.25, midpoint) (digitals -0.5 and
    0.5).  A half-infinite interval always has the payoff's own boundary as its
    finite end, so the preferred value is admissible there.
    """
    J = admissible_damping(model, payoff)
    pref = PREFERRED_R[payoff.kind]
    if not (math.isfinite(J.lo) and math.isfinite(J.hi)):
        return pref
    pad = MARGIN * (J.hi - J.lo)
    mid = 0.5 * (J.lo + J.hi)
    R = max(pref, mid) if payoff.kind in ("call", "digital_call") else min(pref, mid)
    return float(min(max(R, J.lo + pad), J.hi - pad))


def _check_inputs(model: ModelParams, env: MarketEnv, T: float, kind: str, require_martingale: bool):
    if not T > 0:
        raise ValueError("maturity must be > 0")
    if kind.startswith("digital") and not model.has_density:
        raise UnsupportedModel(f"digital payoffs need an absolutely continuous law; {model.family} has none here")
    if require_martingale:
        if not model.strip().contains(1.0):
            raise StripViolation("model lacks a finite first exponential moment")
        gap = float(np.real(model.exponent(np.array(-1j)))) - env.carry
        if abs(gap) > MARTINGALE_TOL:
            raise ArbitrageViolation("model drift is not risk-neutral", kappa_1_minus_carry=gap)


def _integrate(model, env, T, kind, strikes, R, quad: QuadratureSpec):
    zeta = -math.log(env.S0)
    log_k = np.log(np.asarray(strikes, dtype=float))
    pref = math.exp(-env.r * T + zeta * R) / math.pi
    target = quad.abs_tol / pref

    def g(u):
        z = R + 1j * u
        phi = np.exp(T * model.exponent(np.array(1j * R - u)))
        return np.exp(1j * u * zeta) * _laplace(kind, log_k, z) * phi

    def f(u):
        return np.real(g(u))

    def tail_bound(b):
        """int_b^inf |g| from the local power-law slope of |g| between b/2 and b."""
        hi, lo = np.max(np.abs(g(b))), np.max(np.abs(g(b / 2)))
        if hi == 0:
            return 0.0
        slope = math.log(lo / hi) / math.log(2.0) if lo > 0 else math.inf
        return math.inf if slope <= 1.05 else hi * b / (slope - 1)

    if quad.rule == "trapezoid":
        u = np.linspace(0.0, quad.u_max, quad.n_trapezoid + 1)
        vals = np.array([f(x) for x in u])
        return pref * integrate.trapezoid(vals, u, axis=0)

    total = np.zeros(log_k.size)
    a, b = 0.0, FIRST_PANEL
    while True:
        val, err = integrate.quad_vec(f, a, b, epsabs=target / 20, epsrel=1e-13, norm="max", limit=2000)
        total += val
        tail = tail_bound(b)
        if a > 0 and tail < target and np.max(np.abs(val)) < target / 10:
            break
        if b >= quad.u_max:
            if not tail < target:
                raise IntegrationFailure("transform integrand has not decayed at u_max",
                                         u_max=quad.u_max, tail_estimate=tail * pref)
            break
        a, b = b, min(2 * b, quad.u_max)
    return pref * total


def _bounds(kind, env, T, K):
    fwd = env.S0 * math.exp(-env.div * T)
    disc = math.exp(-env.r * T)
    if kind == "call":
        return max(fwd - K * disc, 0.0), fwd
    if kind == "put":
        return max(K * disc - fwd, 0.0), K * disc
    return 0.0, disc


def _clip(kind, env, T, strikes, prices, abs_tol):
    out = np.array(prices, dtype=float)
    for i, K in enumerate(strikes):
        lo, hi = _bounds(kind, env, T, K)
        clipped = min(max(out[i], lo), hi)
        if abs(clipped - out[i]) > abs_tol:
            warnings.warn(QuadratureWarning(f"{kind} K={K}: price {out[i]:.12g} clipped to [{lo:.12g}, {hi:.12g}]"),
                          stacklevel=3)
        out[i] = clipped
    return out


def transform_price(model: ModelParams, env: MarketEnv, T: float, payoff: PayoffSpec,
                    quad: QuadratureSpec = QuadratureSpec(), require_martingale: bool = True) -> float:
    _check_inputs(model, env, T, payoff.kind, require_martingale)
    R = quad.damping if quad.damping is not None else select_damping(model, T, payoff)
    if not admissible_damping(model, payoff).interior(R):
        raise StripViolation("damping override outside the admissible interval", R=R)
    raw = _integrate(model, env, T, payoff.kind, [payoff.K], R, quad)
    return float(_clip(payoff.kind, env, T, [payoff.K], raw, quad.abs_tol)[0])


def price_smile(model: ModelParams, env: MarketEnv, maturities, strikes, kind: str = "call",
                quad: QuadratureSpec = QuadratureSpec(), require_martingale: bool = True) -> np.ndarray:
    """Price matrix (len(maturities) x len(strikes)); cf values are shared across strikes."""
    strikes = np.asarray(strikes, dtype=float)
    out = np.empty((len(maturities), strikes.size))
    for i, T in enumerate(maturities):
        _check_inputs(model, env, T, kind, require_martingale)
        probe = PayoffSpec(kind, float(strikes[0]))
        R = quad.damping if quad.damping is not None else select_damping(model, T, probe)
        raw = _integrate(model, env, T, kind, strikes, R, quad)
        out[i] = _clip(kind, env, T, strikes, raw, quad.abs_tol)
    return out
