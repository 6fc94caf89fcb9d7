"""Parametric catalogue of exponential-Lévy model families.

Every family is a frozen dataclass exposing a vectorised closed-form exponent,
its exponential-moment strip, a Lévy triplet (in ``COMPENSATE_ALL`` form, drift
equal to E[L_1]), analytic moments and, where one exists, a density.  All
families carry a location/drift field ``mu`` so the risk-neutral drift can be
set uniformly.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from typing import ClassVar

import numpy as np
from scipy import integrate, special

from .errors import BesselDomainError, DensityUnknown, ParameterMismatch, StripViolation
from .levy_core import (
    REAL_LINE,
    ZERO_MEASURE,
    Convention,
    DensityMeasure,
    DoubleExponential,
    FiniteActivity,
    LevyTriplet,
    NormalJumps,
    Strip,
    EXPONENT_TOL,
)

# Treat Y this close to 0 or 1 as the CGMY limit case.
CGMY_LIMIT_TOL = 1e-9


def kve_checked(order: float, z):
    """Exponentially scaled K_order(z) = e^z K_order(z) for complex z, Re z > 0.

    The three-term recurrence K_{v+1} - K_{v-1} = (2v/z) K_v is checked on
    every call; a failure raises BesselDomainError instead of returning a
    silently inaccurate value.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real < 0) or np.any(z == 0):
        raise BesselDomainError("complex Bessel K needs Re(z) >= 0, z != 0", order=order)
    k0 = special.kve(order, z)
    km = special.kve(order - 1, z)
    kp = special.kve(order + 1, z)
    if not (np.all(np.isfinite(k0)) and np.all(np.isfinite(km)) and np.all(np.isfinite(kp))):
        raise BesselDomainError("complex Bessel K is not finite", order=order)
    lhs = kp - km
    rhs = 2 * order / z * k0
    scale = np.maximum(np.abs(kp) + np.abs(km), np.abs(rhs))
    if np.any(np.abs(lhs - rhs) > 1e-9 * scale):
        raise BesselDomainError("complex Bessel K failed its recurrence check", order=order)
    return k0


class ModelParams:
    """Shared behaviour of the family dataclasses."""

    family: ClassVar[str] = ""
    simulable: ClassVar[bool] = False

    def exponent(self, u):
        raise NotImplementedError

    def strip(self) -> Strip:
        raise NotImplementedError

    def triplet(self) -> LevyTriplet:
        raise NotImplementedError

    def moments(self) -> dict:
        raise NotImplementedError

    def density(self, x, t: float = 1.0):
        raise DensityUnknown(f"{self.family}: density of L_t is not available in closed form")

    @property
    def has_density(self) -> bool:
        return True

    def mean(self) -> float:
        return self.moments()["mean"]

    def with_mu(self, mu: float) -> "ModelParams":
        return replace(self, mu=mu)

    def cf(self, t: float, u):
        return model_cf(self, t, u)

    def to_dict(self) -> dict:
        d = {"family": self.family}
        d.update(asdict(self))
        return d


def _check(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _closed_triplet(params: ModelParams, c: float, nu) -> LevyTriplet:
    return LevyTriplet(b=params.mean(), c=c, nu=nu, convention=Convention.COMPENSATE_ALL,
                       closed_form=params.exponent)


@dataclass(frozen=True)
class BS(ModelParams):
    mu: float
    sigma: float
    family: ClassVar[str] = "bs"
    simulable: ClassVar[bool] = True

    def __post_init__(self):
        _check(self.sigma > 0, "BS: sigma must be > 0")

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        return 1j * self.mu * u - 0.5 * self.sigma**2 * u * u

    def strip(self):
        return REAL_LINE

    def triplet(self):
        return _closed_triplet(self, self.sigma**2, ZERO_MEASURE)

    def density(self, x, t=1.0):
        s = self.sigma * math.sqrt(t)
        z = (np.asarray(x, dtype=float) - self.mu * t) / s
        return np.exp(-0.5 * z * z) / (s * math.sqrt(2 * math.pi))

    def moments(self):
        return {"mean": self.mu, "variance": self.sigma**2, "skewness": 0.0, "kurtosis": 3.0}


@dataclass(frozen=True)
class Merton(ModelParams):
    """Brownian motion plus compound-Poisson normal jumps; ``mu`` is the drift before jumps."""

    mu: float
    sigma: float
    lam: float
    mu_j: float
    sigma_j: float
    family: ClassVar[str] = "merton"
    simulable: ClassVar[bool] = True

    def __post_init__(self):
        _check(self.sigma >= 0, "Merton: sigma must be >= 0")
        _check(self.lam >= 0, "Merton: lam must be >= 0")
        _check(self.sigma_j > 0, "Merton: sigma_j must be > 0")

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        jumps = np.exp(1j * self.mu_j * u - 0.5 * self.sigma_j**2 * u * u) - 1.0
        return 1j * self.mu * u - 0.5 * self.sigma**2 * u * u + self.lam * jumps

    def strip(self):
        return REAL_LINE

    @property
    def jump_measure(self):
        return FiniteActivity(self.lam, NormalJumps(self.mu_j, self.sigma_j))

    def triplet(self):
        return _closed_triplet(self, self.sigma**2, self.jump_measure)

    @property
    def has_density(self):
        return self.sigma > 0

    def moments(self):
        return {"mean": self.mu + self.lam * self.mu_j,
                "variance": self.sigma**2 + self.lam * self.mu_j**2 + self.lam * self.sigma_j**2}


@dataclass(frozen=True)
class Kou(ModelParams):
    """Brownian motion plus double-exponential jumps.

    Jump density p*t1*e^{-t1 x} for x > 0 and (1-p)*t2*e^{t2 x} for x < 0.
    """

    mu: float
    sigma: float
    lam: float
    p: float
    theta1: float
    theta2: float
    family: ClassVar[str] = "kou"
    simulable: ClassVar[bool] = True

    def __post_init__(self):
        _check(self.sigma >= 0, "Kou: sigma must be >= 0")
        _check(self.lam >= 0, "Kou: lam must be >= 0")
        _check(0 <= self.p <= 1, "Kou: p must lie in [0, 1]")
        _check(self.theta1 > 0 and self.theta2 > 0, "Kou: theta1, theta2 must be > 0")

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        iu = 1j * u
        jumps = self.p * self.theta1 / (self.theta1 - iu) + (1 - self.p) * self.theta2 / (self.theta2 + iu) - 1.0
        return iu * self.mu - 0.5 * self.sigma**2 * u * u + self.lam * jumps

    def strip(self):
        if self.lam == 0:
            return REAL_LINE
        lo = -self.theta2 if self.p < 1 else -math.inf
        hi = self.theta1 if self.p > 0 else math.inf
        return Strip(lo, hi)

    @property
    def jump_law(self):
        return DoubleExponential(self.p, self.theta1, self.theta2)

    @property
    def jump_measure(self):
        return FiniteActivity(self.lam, self.jump_law)

    def triplet(self):
        return _closed_triplet(self, self.sigma**2, self.jump_measure)

    @property
    def has_density(self):
        return self.sigma > 0

    def moments(self):
        lam, p, t1, t2 = self.lam, self.p, self.theta1, self.theta2
        return {"mean": self.mu + lam * p / t1 - lam * (1 - p) / t2,
                # lam E[J^2]; an exponential jump of rate t has second moment 2/t^2
                "variance": self.sigma**2 + 2 * lam * p / t1**2 + 2 * lam * (1 - p) / t2**2}


@dataclass(frozen=True)
class VG(ModelParams):
    """Variance gamma as Brownian motion with drift ``theta`` run on a gamma clock of variance rate ``kappa``.

    Its Lévy density is bilateral gamma, (1/kappa) e^{-M x}/x on x > 0 and
    (1/kappa) e^{-G|x|}/|x| on x < 0, with
    1/M = sqrt(theta^2 kappa^2/4 + sigma^2 kappa/2) + theta kappa/2 and
    1/G = sqrt(theta^2 kappa^2/4 + sigma^2 kappa/2) - theta kappa/2.
    """

    sigma: float
    theta: float
    kappa: float
    mu: float = 0.0
    family: ClassVar[str] = "vg"
    simulable: ClassVar[bool] = True

    def __post_init__(self):
        _check(self.sigma > 0, "VG: sigma must be > 0")
        _check(self.kappa > 0, "VG: kappa must be > 0")

    @property
    def rates(self) -> tuple[float, float]:
        """(G, M): exponential decay rates of the negative and positive jump tails."""
        root = math.sqrt(self.theta**2 * self.kappa**2 / 4 + self.sigma**2 * self.kappa / 2)
        return 1.0 / (root - self.theta * self.kappa / 2), 1.0 / (root + self.theta * self.kappa / 2)

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        G, M = self.rates
        # 1 - iu theta kappa + sigma^2 u^2 kappa/2 factorises as (1 - iu/M)(1 + iu/G).
        return 1j * self.mu * u - (np.log(1 - 1j * u / M) + np.log(1 + 1j * u / G)) / self.kappa

    def time_change_cf(self, t, u):
        """E[e^{iuL_t}] from the subordinated-Brownian form, the reference formula."""
        u = np.asarray(u, dtype=complex)
        base = 1 - 1j * u * self.theta * self.kappa + 0.5 * self.sigma**2 * u * u * self.kappa
        return np.exp(1j * self.mu * u * t) * base ** (-t / self.kappa)

    def strip(self):
        G, M = self.rates
        return Strip(-G, M)

    def levy_density(self, x: float) -> float:
        G, M = self.rates
        rate = M if x > 0 else G
        return math.exp(-rate * abs(x)) / (self.kappa * abs(x))

    def triplet(self):
        nu = DensityMeasure(self.levy_density, strip=self.strip(), zero_index=0.0, name="vg")
        return _closed_triplet(self, 0.0, nu)

    def moments(self):
        return {"mean": self.mu + self.theta, "variance": self.sigma**2 + self.theta**2 * self.kappa}


@dataclass(frozen=True)
class NIG(ModelParams):
    alpha: float
    beta: float
    delta: float
    mu: float = 0.0
    family: ClassVar[str] = "nig"
    simulable: ClassVar[bool] = True

    def __post_init__(self):
        _check(self.alpha > 0, "NIG: alpha must be > 0")
        _check(abs(self.beta) < self.alpha, "NIG: |beta| must be < alpha")
        _check(self.delta > 0, "NIG: delta must be > 0")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.alpha**2 - self.beta**2)

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        w = np.sqrt(self.alpha**2 - (self.beta + 1j * u) ** 2)
        return 1j * self.mu * u + self.delta * (self.gamma - w)

    def strip(self):
        return Strip(-self.alpha - self.beta, self.alpha - self.beta, True, True)

    def levy_density(self, x: float) -> float:
        ax = self.alpha * abs(x)
        return self.delta * self.alpha / (math.pi * abs(x)) * special.kve(1, ax) * math.exp(self.beta * x - ax)

    def triplet(self):
        nu = DensityMeasure(self.levy_density, strip=self.strip(), zero_index=1.0, name="nig")
        return _closed_triplet(self, 0.0, nu)

    def density(self, x, t=1.0):
        a, b, d, m = self.alpha, self.beta, self.delta * t, self.mu * t
        y = np.asarray(x, dtype=float) - m
        q = np.sqrt(1 + (y / d) ** 2)
        arg = a * d * q
        return a / math.pi * special.kve(1, arg) / q * np.exp(d * self.gamma + b * y - arg)

    def moments(self):
        g = self.gamma
        return {"mean": self.mu + self.beta * self.delta / g,
                "variance": self.delta / g + self.beta**2 * self.delta / g**3}


class GHJumpMeasure(DensityMeasure):
    """Generalised-hyperbolic Lévy measure.

    The density is e^{beta x}/|x| * (int_0^inf g(s) e^{-sqrt(s^2+alpha^2)|x|} ds
    + lambda e^{-alpha|x|} 1{lambda >= 0}) with
    g(s) = 2 / (pi^2 s (J_{|lambda|}^2(delta s) + Y_{|lambda|}^2(delta s))),
    the y = s^2/2 form of the usual mixture.  g(s) tends to delta/pi, and the
    constant part integrates in closed form (int_0^inf e^{-sqrt(s^2+a^2)x} ds = a K_1(a x)),
    which is exactly the NIG measure; only the remainder g - delta/pi, which
    decays like s^{-2}, is integrated numerically.  Each mixture component is a
    tempered e^{-a|x|}/|x| law, so the exponent integral over the measure
    reduces to a one-dimensional integral over s as well.
    """

    def __init__(self, params: "GH"):
        self.params = params
        self._nig_part = NIG(params.alpha, params.beta, params.delta, 0.0)
        super().__init__(self._density, strip=params.strip(), zero_index=1.0, name="gh")

    def _excess_mixing(self, s):
        order = abs(self.params.lam)
        d = self.params.delta
        z = d * s
        if z > 50.0:
            # Hankel expansion of J^2 + Y^2 avoids cancellation in g - delta/pi
            m = 4 * order * order
            ratio = 1 + (m - 1) / (2 * (2 * z) ** 2) + 3 * (m - 1) * (m - 9) / (8 * (2 * z) ** 4) \
                + 15 * (m - 1) * (m - 9) * (m - 25) / (48 * (2 * z) ** 6)
            return d / math.pi * (1.0 / ratio - 1.0)
        return 2.0 / (math.pi**2 * s * (special.jv(order, z) ** 2 + special.yv(order, z) ** 2)) - d / math.pi

    def _s_edges(self):
        d = self.params.delta
        return [0.0, 1.0 / d, 10.0 / d, 50.0 / d, math.inf]

    @lru_cache(maxsize=8192)
    def _density(self, x: float) -> float:
        p = self.params
        ax = abs(x)

        def g(s):
            return self._excess_mixing(s) * math.exp(-(math.sqrt(s * s + p.alpha**2) - p.alpha) * ax)

        val = 0.0
        edges = self._s_edges()
        for lo, hi in zip(edges[:-1], edges[1:]):
            val += integrate.quad(g, lo, hi, epsrel=1e-8, epsabs=1e-13, limit=200, full_output=1)[0]
        if p.lam >= 0:
            val += p.lam
        return math.exp(p.beta * x - p.alpha * ax) * val / ax + self._nig_part.levy_density(x)

    def exponent(self, u, convention):
        u_arr = np.asarray(u, dtype=complex)
        out = np.empty(u_arr.shape, dtype=complex)
        for idx, uu in np.ndenumerate(u_arr):
            out[idx] = self._exponent_scalar(complex(uu), convention)
        return out if out.shape else out[()]

    @staticmethod
    def _tempered(u: complex, beta: float, a: float) -> complex:
        """int_{R\\0} (e^{iux} - 1 - iux) e^{beta x - a|x|}/|x| dx, closed form."""
        ap, an = a - beta, a + beta
        return -np.log1p(-1j * u / ap) - 1j * u / ap - np.log1p(1j * u / an) + 1j * u / an

    def _exponent_scalar(self, u: complex, convention: Convention) -> complex:
        if u == 0:
            return 0j
        p = self.params

        def f(s):
            return self._excess_mixing(s) * self._tempered(u, p.beta, math.sqrt(s * s + p.alpha**2))

        total = 0j
        edges = self._s_edges()
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, lo, hi, epsabs=EXPONENT_TOL / 10, epsrel=1e-12, limit=400,
                                    complex_func=True, full_output=1)[0]
        # constant part of the mixing: the NIG measure, integrated over s in closed form
        total += self._nig_part.delta * (self._nig_part.gamma - np.sqrt(p.alpha**2 - (p.beta + 1j * u) ** 2)) \
            - 1j * u * self._nig_part.moments()["mean"]
        if p.lam >= 0:
            total += p.lam * self._tempered(u, p.beta, p.alpha)
        if convention == Convention.TRUNCATE_UNIT:
            total += 1j * u * self.big_jump_mean()
        return total

    def big_jump_mean(self):
        if not hasattr(self, "_big_mean"):
            self._big_mean = DensityMeasure.big_jump_mean(self)
        return self._big_mean


@dataclass(frozen=True)
class GH(ModelParams):
    alpha: float
    beta: float
    delta: float
    mu: float = 0.0
    lam: float = 1.0
    family: ClassVar[str] = "gh"

    def __post_init__(self):
        _check(self.alpha > 0, "GH: alpha must be > 0")
        _check(abs(self.beta) < self.alpha, "GH: |beta| must be < alpha")
        _check(self.delta > 0, "GH: delta must be > 0")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.alpha**2 - self.beta**2)

    def _log_k_ratio(self, w):
        """log[(gamma/w)^lam K_lam(delta w) / K_lam(delta gamma)] on the right half-plane."""
        lam, d, g = self.lam, self.delta, self.gamma
        base = math.log(special.kve(lam, d * g)) - d * g
        out = np.empty(w.shape, dtype=complex)
        zero = np.abs(w) < 1e-300
        wz = w[~zero]
        out[~zero] = lam * (math.log(g) - np.log(wz)) + np.log(kve_checked(lam, d * wz)) - d * wz - base
        if np.any(zero):
            if lam >= 0:
                raise StripViolation("GH exponent diverges on the strip boundary for lambda >= 0")
            # K_v(z) ~ Gamma(|v|) 2^{|v|-1} z^{-|v|} as z -> 0
            out[zero] = lam * math.log(g) + special.gammaln(-lam) + (-lam - 1) * math.log(2) + lam * math.log(d) - base
        return out

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        w = np.sqrt(self.alpha**2 - (self.beta + 1j * u) ** 2)
        shape = w.shape
        res = 1j * self.mu * u + self._log_k_ratio(np.atleast_1d(w)).reshape(shape)
        return res

    def strip(self):
        closed = self.lam < 0
        return Strip(-self.alpha - self.beta, self.alpha - self.beta, closed, closed)

    def triplet(self):
        return _closed_triplet(self, 0.0, GHJumpMeasure(self))

    def density(self, x, t=1.0):
        if t != 1.0:
            raise DensityUnknown("GH density is closed-form only at t = 1")
        a, b, d, m, lam = self.alpha, self.beta, self.delta, self.mu, self.lam
        y = np.asarray(x, dtype=float) - m
        q = np.sqrt(d * d + y * y)
        zeta = d * self.gamma
        log_c = (lam / 2) * math.log(a * a - b * b) - 0.5 * math.log(2 * math.pi) - (lam - 0.5) * math.log(a) \
            - lam * math.log(d) - (math.log(special.kve(lam, zeta)) - zeta)
        return np.exp(log_c + (lam - 0.5) * np.log(q) + np.log(special.kve(lam - 0.5, a * q)) - a * q + b * y)

    def moments(self):
        d, b, lam = self.delta, self.beta, self.lam
        zeta = d * self.gamma
        k0, k1, k2 = (special.kve(lam + j, zeta) for j in (0, 1, 2))
        r1 = k1 / k0
        return {"mean": self.mu + b * d * d / zeta * r1,
                "variance": d * d / zeta * r1 + b * b * d**4 / zeta**2 * (k2 / k0 - r1 * r1)}


@dataclass(frozen=True)
class CGMY(ModelParams):
    C: float
    G: float
    M: float
    Y: float
    mu: float = 0.0
    family: ClassVar[str] = "cgmy"

    def __post_init__(self):
        _check(self.C > 0 and self.G > 0 and self.M > 0, "CGMY: C, G, M must be > 0")
        _check(self.Y < 2, "CGMY: Y must be < 2")

    def _jump_exponent(self, u):
        """Jump part with drift E[jumps] included (the cf without ``mu``)."""
        C, G, M, Y = self.C, self.G, self.M, self.Y
        iu = 1j * u
        if abs(Y) < CGMY_LIMIT_TOL:
            return -C * (np.log1p(-iu / M) + np.log1p(iu / G))
        if abs(Y - 1) < CGMY_LIMIT_TOL:
            # x log(x) form stays finite on the closed strip edge
            mp, gp = M - iu, G + iu
            return C * (special.xlogy(mp, mp) - mp * math.log(M) + special.xlogy(gp, gp) - gp * math.log(G)) \
                + iu * C * math.log(G / M)
        return C * special.gamma(-Y) * ((M - iu) ** Y - M**Y + (G + iu) ** Y - G**Y)

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        return 1j * self.mu * u + self._jump_exponent(u)

    def strip(self):
        closed = self.Y > 0
        return Strip(-self.G, self.M, closed, closed)

    def levy_density(self, x: float) -> float:
        rate = self.M if x > 0 else self.G
        return self.C * math.exp(-rate * abs(x)) / abs(x) ** (1 + self.Y)

    def triplet(self):
        nu = DensityMeasure(self.levy_density, strip=self.strip(), zero_index=self.Y, name="cgmy")
        return _closed_triplet(self, 0.0, nu)

    def moments(self):
        C, G, M, Y = self.C, self.G, self.M, self.Y
        if abs(Y) < CGMY_LIMIT_TOL:
            jump_mean = C * (1 / M - 1 / G)
        elif abs(Y - 1) < CGMY_LIMIT_TOL:
            jump_mean = C * math.log(G / M)
        else:
            jump_mean = C * special.gamma(-Y) * Y * (G ** (Y - 1) - M ** (Y - 1))
        var = C * special.gamma(2 - Y) * (M ** (Y - 2) + G ** (Y - 2))
        return {"mean": self.mu + jump_mean, "variance": var}


@dataclass(frozen=True)
class Meixner(ModelParams):
    alpha: float
    beta: float
    delta: float
    mu: float = 0.0
    family: ClassVar[str] = "meixner"

    def __post_init__(self):
        _check(self.alpha > 0, "Meixner: alpha must be > 0")
        _check(-math.pi < self.beta < math.pi, "Meixner: beta must lie in (-pi, pi)")
        _check(self.delta > 0, "Meixner: delta must be > 0")

    def exponent(self, u):
        u = np.asarray(u, dtype=complex)
        w = (self.alpha * u - 1j * self.beta) / 2
        w = np.where(w.real >= 0, w, -w)  # cosh is even
        log_cosh = w + np.log1p(np.exp(-2 * w)) - math.log(2)
        return 1j * self.mu * u + 2 * self.delta * (math.log(math.cos(self.beta / 2)) - log_cosh)

    def strip(self):
        return Strip((-math.pi - self.beta) / self.alpha, (math.pi - self.beta) / self.alpha)

    def levy_density(self, x: float) -> float:
        a = math.pi * abs(x) / self.alpha
        # x sinh(pi x/alpha) = |x| (1 - e^{-2a}) e^{a}/2
        return self.delta * math.exp(self.beta * x / self.alpha - a) * 2 / (abs(x) * -math.expm1(-2 * a))

    def triplet(self):
        nu = DensityMeasure(self.levy_density, strip=self.strip(), zero_index=1.0, name="meixner")
        return _closed_triplet(self, 0.0, nu)

    def density(self, x, t=1.0):
        a, b, d = self.alpha, self.beta, self.delta * t
        y = (np.asarray(x, dtype=float) - self.mu * t) / a
        log_c = 2 * d * math.log(2 * math.cos(b / 2)) - math.log(2 * a * math.pi) - special.gammaln(2 * d)
        return np.exp(log_c + b * y + 2 * special.loggamma(d + 1j * y).real)

    def moments(self):
        a, b, d = self.alpha, self.beta, self.delta
        return {"mean": self.mu + a * d * math.tan(b / 2), "variance": a * a * d / (2 * math.cos(b / 2) ** 2)}


FAMILIES: dict[str, type] = {cls.family: cls for cls in (BS, Merton, Kou, VG, NIG, GH, CGMY, Meixner)}


def params_from_dict(data: dict) -> ModelParams:
    data = dict(data)
    try:
        cls = FAMILIES[str(data.pop("family")).lower()]
    except KeyError as exc:
        raise ValueError(f"unknown or missing model family: {exc}") from None
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown parameters for {cls.family}: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in data.items()})


def moment_strip(params: ModelParams) -> Strip:
    return params.strip()


def model_cf(params: ModelParams, t: float, u):
    if t < 0:
        raise ValueError("t must be >= 0")
    u = np.asarray(u, dtype=complex)
    strip = params.strip()
    for p in np.unique(-u.imag.ravel()):
        if not strip.contains(float(p)):
            raise StripViolation(f"{params.family}: Im(u) outside the moment strip", p=float(p),
                                 strip=[strip.lo, strip.hi])
    if t == 0:
        return np.ones_like(u)
    return np.exp(t * params.exponent(u))


def model_triplet(params: ModelParams) -> LevyTriplet:
    return params.triplet()


def model_density(params: ModelParams, t: float, x):
    if t <= 0:
        raise ValueError("t must be > 0")
    return params.density(x, t)


def model_moments(params: ModelParams) -> dict:
    return params.moments()


def nig_convolve(a: NIG, b: NIG) -> NIG:
    if a.alpha != b.alpha or a.beta != b.beta:
        raise ParameterMismatch("NIG convolution needs equal alpha and beta",
                                alpha=[a.alpha, b.alpha], beta=[a.beta, b.beta])
    return NIG(a.alpha, a.beta, a.delta + b.delta, a.mu + b.mu)
