"""Lévy triplets, the Lévy–Khintchine exponent, and path/moment classification.

A triplet ``(b, c, nu)`` is stored together with the truncation convention its
drift refers to:

* ``TRUNCATE_UNIT``  psi(u) = iub - cu^2/2 + int (e^{iux} - 1 - iux 1{|x|<1}) nu(dx)
* ``COMPENSATE_ALL`` psi(u) = iub - cu^2/2 + int (e^{iux} - 1 - iux) nu(dx)

The second form needs a finite first moment of the big jumps.  Model-backed
triplets also carry a closed-form exponent; ``method="quadrature"`` bypasses it
and integrates the Lévy measure directly, which is how the two are
cross-checked.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, special

from .errors import IntegrationFailure, StripViolation, Undecidable

# Width of the region around 0 handled by the second-order expansion.
SMALL_X = 1e-6
EXPONENT_TOL = 1e-10
# Margin on fitted tail exponents before declaring (non)convergence.
TAIL_MARGIN = 0.1


class Convention(str, enum.Enum):
    TRUNCATE_UNIT = "truncate_unit"
    COMPENSATE_ALL = "compensate_all"


class Finiteness(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class Strip:
    """Real interval of exponents p with E[exp(p L_1)] < inf."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, p: float) -> bool:
        if p < self.lo or p > self.hi:
            return False
        if p == self.lo:
            return self.lo_closed and math.isfinite(p)
        if p == self.hi:
            return self.hi_closed and math.isfinite(p)
        return True

    def interior(self, p: float) -> bool:
        return self.lo < p < self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        if math.isinf(self.lo) and math.isinf(self.hi):
            return 0.0
        if math.isinf(self.lo) or math.isinf(self.hi):
            raise ValueError("half-infinite strip has no midpoint")
        return 0.5 * (self.lo + self.hi)

    def shift(self, a: float) -> "Strip":
        return Strip(self.lo + a, self.hi + a, self.lo_closed, self.hi_closed)

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


REAL_LINE = Strip()


def exp_remainder(z):
    """e^z - 1 - z without cancellation for small |z| (complex arrays allowed)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    term = zs * zs / 2.0
    acc = term.copy()
    for k in range(3, 12):
        term = term * zs / k
        acc += term
    out[small] = acc
    zl = z[~small]
    out[~small] = np.exp(zl) - 1.0 - zl
    return out


def _exp_remainder_scalar(z: complex) -> complex:
    if abs(z) < 0.1:
        term = z * z / 2.0
        acc = term
        for k in range(3, 12):
            term = term * z / k
            acc += term
        return acc
    return cmath.exp(z) - 1.0 - z


# ---------------------------------------------------------------------------
# Jump-size laws for finite-activity measures
# ---------------------------------------------------------------------------


class JumpLaw:
    """Probability law of a single jump; subclasses give closed forms."""

    def cf(self, u):
        raise NotImplementedError

    @property
    def strip(self) -> Strip:
        raise NotImplementedError

    @property
    def has_positive(self) -> bool:
        raise NotImplementedError

    @property
    def has_negative(self) -> bool:
        raise NotImplementedError

    def expect(self, f: Callable, lo: float = -math.inf, hi: float = math.inf, tol: float = 1e-12) -> float:
        """E[f(J); lo <= J <= hi]."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def tilt(self, alpha: float) -> tuple[float, "JumpLaw"]:
        """Return (E[e^{alpha J}], law with density proportional to e^{alpha x} F(dx))."""
        raise NotImplementedError

    def interval_mass(self, lo, hi) -> np.ndarray:
        """P(lo <= J < hi), vectorised over interval arrays."""
        raise NotImplementedError

    def mean(self) -> float:
        return self.expect(lambda x: x)


@dataclass(frozen=True)
class PointMass(JumpLaw):
    a: float

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("jump law may not charge 0")

    def cf(self, u):
        return np.exp(1j * np.asarray(u) * self.a)

    @property
    def strip(self):
        return REAL_LINE

    @property
    def has_positive(self):
        return self.a > 0

    @property
    def has_negative(self):
        return self.a < 0

    def expect(self, f, lo=-math.inf, hi=math.inf, tol=1e-12):
        return float(f(self.a)) if lo <= self.a <= hi else 0.0

    def sample(self, rng, n):
        return np.full(n, float(self.a))

    def tilt(self, alpha):
        return math.exp(alpha * self.a), self

    def interval_mass(self, lo, hi):
        return ((np.asarray(lo) <= self.a) & (self.a < np.asarray(hi))).astype(float)

    def mean(self):
        return self.a


@dataclass(frozen=True)
class NormalJumps(JumpLaw):
    loc: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("normal jump scale must be > 0")

    def cf(self, u):
        u = np.asarray(u)
        return np.exp(1j * u * self.loc - 0.5 * self.scale**2 * u * u)

    def pdf(self, x):
        z = (np.asarray(x) - self.loc) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2 * math.pi))

    @property
    def strip(self):
        return REAL_LINE

    has_positive = True
    has_negative = True

    def expect(self, f, lo=-math.inf, hi=math.inf, tol=1e-12):
        a = max(lo, self.loc - 40 * self.scale)
        b = min(hi, self.loc + 40 * self.scale)
        if a >= b:
            return 0.0
        pts = [p for p in (0.0, self.loc) if a < p < b]
        val, _ = integrate.quad(lambda x: f(x) * self.pdf(x), a, b, points=pts or None,
                                epsabs=tol, epsrel=1e-12, limit=400)
        return val

    def sample(self, rng, n):
        return self.loc + self.scale * rng.standard_normal(n)

    def tilt(self, alpha):
        factor = math.exp(alpha * self.loc + 0.5 * alpha**2 * self.scale**2)
        return factor, NormalJumps(self.loc + alpha * self.scale**2, self.scale)

    def interval_mass(self, lo, hi):
        zl = (np.asarray(lo, dtype=float) - self.loc) / self.scale
        zh = (np.asarray(hi, dtype=float) - self.loc) / self.scale
        # difference of upper or lower tails, whichever avoids cancellation
        upper = special.ndtr(-zl) - special.ndtr(-zh)
        lower = special.ndtr(zh) - special.ndtr(zl)
        return np.where(zl > 0, upper, lower)

    def mean(self):
        return self.loc


@dataclass(frozen=True)
class DoubleExponential(JumpLaw):
    """Density p*t1*e^{-t1 x} on x>0 plus (1-p)*t2*e^{t2 x} on x<0."""

    p: float
    theta_pos: float
    theta_neg: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not (self.theta_pos > 0 and self.theta_neg > 0):
            raise ValueError("exponential rates must be > 0")

    def cf(self, u):
        iu = 1j * np.asarray(u)
        return self.p * self.theta_pos / (self.theta_pos - iu) + (1 - self.p) * self.theta_neg / (self.theta_neg + iu)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = self.p * self.theta_pos * np.exp(-self.theta_pos * np.abs(x))
        neg = (1 - self.p) * self.theta_neg * np.exp(-self.theta_neg * np.abs(x))
        return np.where(x > 0, pos, np.where(x < 0, neg, 0.0))

    @property
    def strip(self):
        return Strip(-self.theta_neg if self.p < 1 else -math.inf, self.theta_pos if self.p > 0 else math.inf)

    @property
    def has_positive(self):
        return self.p > 0

    @property
    def has_negative(self):
        return self.p < 1

    def expect(self, f, lo=-math.inf, hi=math.inf, tol=1e-12):
        total = 0.0
        if self.p > 0 and hi > 0:
            a, b = max(lo, 0.0), min(hi, 60.0 / self.theta_pos)
            if a < b:
                total += integrate.quad(lambda x: f(x) * self.p * self.theta_pos * math.exp(-self.theta_pos * x),
                                        a, b, epsabs=tol, epsrel=1e-12, limit=400)[0]
        if self.p < 1 and lo < 0:
            a, b = max(lo, -60.0 / self.theta_neg), min(hi, 0.0)
            if a < b:
                total += integrate.quad(lambda x: f(x) * (1 - self.p) * self.theta_neg * math.exp(self.theta_neg * x),
                                        a, b, epsabs=tol, epsrel=1e-12, limit=400)[0]
        return total

    def sample(self, rng, n):
        up = rng.random(n) < self.p
        e = rng.standard_exponential(n)
        return np.where(up, e / self.theta_pos, -e / self.theta_neg)

    def tilt(self, alpha):
        if not self.strip.interior(alpha):
            raise StripViolation("tilt outside the jump law's exponential strip", alpha=alpha)
        wp = self.p * self.theta_pos / (self.theta_pos - alpha)
        wn = (1 - self.p) * self.theta_neg / (self.theta_neg + alpha)
        factor = wp + wn
        return factor, DoubleExponential(wp / factor, self.theta_pos - alpha, self.theta_neg + alpha)

    def _cdf(self, x):
        x = np.asarray(x, dtype=float)
        neg = (1 - self.p) * np.exp(self.theta_neg * np.minimum(x, 0.0))
        pos = (1 - self.p) + self.p * -np.expm1(-self.theta_pos * np.maximum(x, 0.0))
        return np.where(x < 0, neg, pos)

    def interval_mass(self, lo, hi):
        return self._cdf(hi) - self._cdf(lo)

    def mean(self):
        return self.p / self.theta_pos - (1 - self.p) / self.theta_neg


# ---------------------------------------------------------------------------
# Lévy measures
# ---------------------------------------------------------------------------


def _sided_intervals(lo: float, hi: float) -> list[tuple[float, float]]:
    """Split [lo, hi] into pieces that avoid straddling 0."""
    pieces = []
    if lo < 0:
        pieces.append((lo, min(hi, 0.0)))
    if hi > 0:
        pieces.append((max(lo, 0.0), hi))
    return [(a, b) for a, b in pieces if a < b]


class LevyMeasure:
    """Measure nu on R \\ {0} with int (1 ^ x^2) nu(dx) < inf."""

    #: exponential-moment strip when known analytically, else None
    strip: Strip | None = None

    def integrate(self, f: Callable, lo: float = -math.inf, hi: float = math.inf, tol: float = 1e-10) -> float:
        raise NotImplementedError

    @property
    def has_positive(self) -> bool:
        raise NotImplementedError

    @property
    def has_negative(self) -> bool:
        raise NotImplementedError

    def exponent(self, u, convention: Convention) -> complex:
        """int (e^{iux} - 1 - iux h(x)) nu(dx) for the given truncation h."""
        raise NotImplementedError

    def tilt(self, alpha: float) -> "LevyMeasure":
        raise NotImplementedError

    # Classification queries. Each returns True (finite) / False, or raises Undecidable.
    def mass_finite(self) -> bool:
        raise NotImplementedError

    def small_abs_moment_finite(self) -> bool:
        """int_{|x|<=1} |x| nu(dx) < inf."""
        raise NotImplementedError

    def tail_moment_finite(self, p: float) -> bool:
        """int_{|x|>=1} |x|^p nu(dx) < inf."""
        raise NotImplementedError

    def tail_exp_moment_finite(self, p: float) -> bool:
        """int_{|x|>=1} e^{px} nu(dx) < inf."""
        if self.strip is not None:
            return self.strip.contains(p)
        raise NotImplementedError

    def big_jump_mean(self) -> float:
        """int_{|x|>=1} x nu(dx), needed for convention changes."""
        return self.integrate(lambda x: x, -math.inf, -1.0) + self.integrate(lambda x: x, 1.0, math.inf)


class NullMeasure(LevyMeasure):
    strip = REAL_LINE

    def integrate(self, f, lo=-math.inf, hi=math.inf, tol=1e-10):
        return 0.0

    has_positive = False
    has_negative = False

    def exponent(self, u, convention):
        return np.zeros_like(np.asarray(u, dtype=complex))

    def tilt(self, alpha):
        return self

    def mass_finite(self):
        return True

    def small_abs_moment_finite(self):
        return True

    def tail_moment_finite(self, p):
        return True

    def big_jump_mean(self):
        return 0.0

    def __repr__(self):
        return "NullMeasure()"

    def __eq__(self, other):
        return isinstance(other, NullMeasure)

    def __hash__(self):
        return 0


ZERO_MEASURE = NullMeasure()


@dataclass(frozen=True)
class FiniteActivity(LevyMeasure):
    """nu = intensity * F for a probability law F."""

    intensity: float
    law: JumpLaw

    def __post_init__(self):
        if not self.intensity >= 0:
            raise ValueError("intensity must be >= 0")

    @property
    def strip(self):
        return REAL_LINE if self.intensity == 0 else self.law.strip

    def integrate(self, f, lo=-math.inf, hi=math.inf, tol=1e-10):
        if self.intensity == 0:
            return 0.0
        total = 0.0
        for a, b in _sided_intervals(lo, hi):
            # 0 itself carries no mass; endpoints exactly at 0 are harmless.
            total += self.law.expect(f, a, b, tol / max(self.intensity, 1.0))
        return self.intensity * total

    @property
    def has_positive(self):
        return self.intensity > 0 and self.law.has_positive

    @property
    def has_negative(self):
        return self.intensity > 0 and self.law.has_negative

    @cached_property
    def _small_mean(self) -> float:
        return self.law.expect(lambda x: x, -1.0, 1.0) - self._boundary_mean()

    def _boundary_mean(self) -> float:
        # expect() uses closed intervals; |x| = 1 belongs to the big jumps.
        if isinstance(self.law, PointMass) and abs(self.law.a) == 1.0:
            return self.law.a
        return 0.0

    def exponent(self, u, convention):
        u = np.asarray(u, dtype=complex)
        if self.intensity == 0:
            return np.zeros_like(u)
        jump_mean = self.law.mean() if convention == Convention.COMPENSATE_ALL else self._small_mean
        return self.intensity * (self.law.cf(u) - 1.0 - 1j * u * jump_mean)

    def tilt(self, alpha):
        if self.intensity == 0:
            return self
        factor, law = self.law.tilt(alpha)
        return FiniteActivity(self.intensity * factor, law)

    def mass_finite(self):
        return True

    def small_abs_moment_finite(self):
        return True

    def tail_moment_finite(self, p):
        if self.intensity == 0 or isinstance(self.law, PointMass):
            return True
        return True  # normal and double-exponential laws have all moments

    def big_jump_mean(self):
        if self.intensity == 0:
            return 0.0
        return self.intensity * (self.law.mean() - self._small_mean)


class DensityMeasure(LevyMeasure):
    """Lévy measure given by a pointwise density.

    Optional analytic metadata short-circuits the numeric classification:

    * ``strip``      exponential-moment strip
    * ``zero_index`` a with nu(x) ~ |x|^{-1-a} near 0 (0 for log-type VG mass)
    * ``tail_index`` a with nu(x) ~ |x|^{-1-a} at infinity (power tails only)
    """

    def __init__(self, density: Callable, *, strip: Strip | None = None, zero_index: float | None = None,
                 tail_index: float | None = None, positive: bool = True, negative: bool = True,
                 name: str = "density"):
        self.density = density
        self.strip = strip
        self.zero_index = zero_index
        self.tail_index = tail_index
        self._positive = positive
        self._negative = negative
        self.name = name
        self._check_admissible()

    def __repr__(self):
        return f"DensityMeasure({self.name})"

    @property
    def has_positive(self):
        return self._positive

    @property
    def has_negative(self):
        return self._negative

    def _nu(self, x):
        return float(self.density(x))

    def _check_admissible(self):
        # A non-finite value of int (1 ^ x^2) nu would surface as a quadrature failure.
        total = self.integrate(lambda x: min(1.0, x * x), tol=1e-8)
        if not math.isfinite(total) or total < 0:
            raise ValueError(f"{self.name}: int (1 ^ x^2) nu(dx) is not finite")

    # -- quadrature ----------------------------------------------------------

    def _side(self, g: Callable[[float], float], a: float, b: float, tol: float, complex_func=False):
        """Integrate g over [a, b] with 0 <= a < b <= inf using geometric panels."""
        total = 0.0
        err_total = 0.0
        edges = [a]
        for e in (1e-8, 1e-6, 1e-4, 1e-2, 0.1, 1.0):
            if a < e < b:
                edges.append(e)
        bounded_end = min(b, 2.0) if math.isinf(b) else b
        if bounded_end > edges[-1]:
            edges.append(bounded_end)

        def panel(lo_, hi_):
            out = integrate.quad(g, lo_, hi_, epsabs=tol / 20, epsrel=1e-12, limit=400,
                                 complex_func=complex_func, full_output=1)
            if complex_func:
                val = out[0]
                err = abs(out[1])
            else:
                val, err = out[0], out[1]
            return val, err

        for lo_, hi_ in zip(edges[:-1], edges[1:]):
            val, err = panel(lo_, hi_)
            total += val
            err_total += err
        if math.isinf(b):
            x = edges[-1]
            quiet = 0
            while quiet < 3:
                y = 2.0 * x
                val, err = panel(x, y)
                total += val
                err_total += err
                quiet = quiet + 1 if abs(val) < tol / 50 else 0
                x = y
                if x > 1e4 and quiet < 3:
                    # slowly decaying (power-law) tail: finish with quad's 1/t map of [x, inf)
                    val, err = panel(x, math.inf)
                    total += val
                    err_total += err
                    break
        if not np.isfinite(total) or err_total > max(1e3 * tol, 1e-7 * abs(total)):
            raise IntegrationFailure(f"{self.name}: quadrature did not reach tolerance",
                                     estimate=complex(total).real, error=err_total)
        return total

    def integrate(self, f, lo=-math.inf, hi=math.inf, tol=1e-10):
        total = 0.0
        for a, b in _sided_intervals(lo, hi):
            if b <= 0:
                if not self._negative:
                    continue
                total += self._side(lambda y: f(-y) * self._nu(-y), -b, -a, tol)
            else:
                if not self._positive:
                    continue
                total += self._side(lambda y: f(y) * self._nu(y), a, b, tol)
        return total

    @cached_property
    def _second_moment_near_zero(self) -> tuple[float, float]:
        pos = self._side(lambda y: y * y * self._nu(y), 0.0, SMALL_X, 1e-16) if self._positive else 0.0
        neg = self._side(lambda y: y * y * self._nu(-y), 0.0, SMALL_X, 1e-16) if self._negative else 0.0
        return pos, neg

    def exponent(self, u, convention):
        u_arr = np.asarray(u, dtype=complex)
        out = np.empty(u_arr.shape, dtype=complex)
        for idx, uu in np.ndenumerate(u_arr):
            out[idx] = self._exponent_scalar(complex(uu), convention)
        return out if out.shape else out[()]

    def _exponent_scalar(self, u: complex, convention: Convention) -> complex:
        if u == 0:
            return 0j
        compensate_big = convention == Convention.COMPENSATE_ALL
        m2_pos, m2_neg = self._second_moment_near_zero
        total = -0.5 * u * u * (m2_pos + m2_neg)

        def integrand(y, sign):
            z = 1j * u * sign * y
            rem = _exp_remainder_scalar(z)
            if y >= 1.0 and not compensate_big:
                rem += z
            return rem * self._nu(sign * y)

        for sign, present in ((1.0, self._positive), (-1.0, self._negative)):
            if present:
                total += self._side(lambda y: integrand(y, sign), SMALL_X, math.inf, EXPONENT_TOL,
                                    complex_func=True)
        return total

    def tilt(self, alpha):
        if self.strip is not None and not self.strip.contains(alpha):
            raise StripViolation("tilt outside the exponential strip", alpha=alpha)
        base = self.density
        return DensityMeasure(lambda x: math.exp(alpha * x) * base(x),
                              strip=None if self.strip is None else self.strip.shift(-alpha),
                              zero_index=self.zero_index, tail_index=None if alpha != 0 else self.tail_index,
                              positive=self._positive, negative=self._negative,
                              name=f"{self.name}*exp({alpha:g}x)")

    # -- classification -------------------------------------------------------

    def _near_zero_slope(self) -> float:
        xs = np.logspace(-8, -7, 9)
        slopes = []
        for sign, present in ((1.0, self._positive), (-1.0, self._negative)):
            if present:
                vals = np.array([self._nu(sign * x) for x in xs])
                if np.all(vals > 0):
                    slopes.append(np.polyfit(np.log(xs), np.log(vals), 1)[0])
        return min(slopes) if slopes else 0.0

    def _zero_integral_finite(self, q: float) -> bool:
        """Is int_{0<|x|<=1} |x|^q nu(dx) finite?"""
        if self.zero_index is not None:
            return q > self.zero_index
        s = self._near_zero_slope()
        if q + s > -1 + TAIL_MARGIN:
            return True
        if q + s < -1 - TAIL_MARGIN:
            return False
        raise Undecidable(f"{self.name}: near-zero exponent {s:.3f} too close to the boundary for q={q}")

    def mass_finite(self):
        return self._zero_integral_finite(0.0)

    def small_abs_moment_finite(self):
        return self._zero_integral_finite(1.0)

    def _tail_fit(self, sign: float) -> tuple[float, float, bool]:
        """Fit log nu over the last decade before underflow: (power slope, exp slope, light)."""
        x_end = 1e6
        x = 2.0
        while x < 1e6:
            if not self._nu(sign * 2 * x) > 1e-280:
                x_end = x
                break
            x *= 2
        if x_end < 20:
            return -math.inf, -math.inf, True
        xs = np.linspace(x_end / 10, x_end, 11)
        vals = np.array([self._nu(sign * v) for v in xs])
        logs = np.log(vals)
        power = np.polyfit(np.log(xs), logs, 1)[0]
        expo = np.polyfit(xs, logs, 1)[0]
        return power, expo, False

    def tail_moment_finite(self, p):
        if p <= 0:
            return True
        if self.tail_index is not None:
            return p < self.tail_index
        if self.strip is not None and self.strip.lo < 0 < self.strip.hi:
            return True
        for sign, present in ((1.0, self._positive), (-1.0, self._negative)):
            if not present:
                continue
            power, _, light = self._tail_fit(sign)
            if light:
                continue
            if p + power < -1 - TAIL_MARGIN:
                continue
            if p + power > -1 + TAIL_MARGIN:
                return False
            raise Undecidable(f"{self.name}: tail exponent {power:.3f} too close to the boundary for p={p}")
        return True

    def tail_exp_moment_finite(self, p):
        if self.strip is not None:
            return self.strip.contains(p)
        if p == 0:
            return True
        sign = 1.0 if p > 0 else -1.0
        if (sign > 0 and not self._positive) or (sign < 0 and not self._negative):
            return True
        _, expo, light = self._tail_fit(sign)
        if light:
            return True
        rate = -expo  # nu decays like e^{-rate |x|} on this side
        if abs(p) < rate - TAIL_MARGIN:
            return True
        if abs(p) > rate + TAIL_MARGIN:
            return False
        raise Undecidable(f"{self.name}: exponential tail rate {rate:.3f} too close to |p|={abs(p)}")


# ---------------------------------------------------------------------------
# Triplets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathReport:
    activity: Finiteness
    variation: Finiteness
    subordinator: bool
    spectrally_negative: bool
    spectrally_positive: bool
    special_semimartingale: bool

    def to_dict(self) -> dict:
        return {
            "activity": self.activity.value,
            "variation": self.variation.value,
            "subordinator": self.subordinator,
            "spectrally_negative": self.spectrally_negative,
            "spectrally_positive": self.spectrally_positive,
            "special_semimartingale": self.special_semimartingale,
        }


@dataclass(frozen=True)
class LevyTriplet:
    b: float
    c: float
    nu: LevyMeasure = ZERO_MEASURE
    convention: Convention = Convention.TRUNCATE_UNIT
    # Closed-form exponent of the same law; ignored by method="quadrature".
    closed_form: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("diffusion coefficient c must be >= 0")
        if self.convention == Convention.COMPENSATE_ALL and not self.nu.tail_moment_finite(1.0):
            raise ValueError("COMPENSATE_ALL requires int_{|x|>=1} |x| nu(dx) < inf")

    @property
    def strip(self) -> Strip | None:
        return self.nu.strip

    def exp_moment_finite(self, p: float) -> bool:
        return self.nu.tail_exp_moment_finite(p)

    def check_argument(self, u) -> None:
        for p in np.unique(-np.imag(np.atleast_1d(np.asarray(u, dtype=complex)))):
            if p != 0 and not self.exp_moment_finite(float(p)):
                raise StripViolation("Im(u) outside the exponential-moment strip", p=float(p))

    def exponent(self, u, method: str = "auto"):
        self.check_argument(u)
        u = np.asarray(u, dtype=complex)
        if method not in ("auto", "quadrature"):
            raise ValueError(f"unknown method {method!r}")
        if method == "auto" and self.closed_form is not None:
            val = np.asarray(self.closed_form(u), dtype=complex)
        else:
            val = 1j * u * self.b - 0.5 * self.c * u * u + self.nu.exponent(u, self.convention)
        # psi(0) = 0 holds exactly; closed forms built from logs can leave 1e-17 residue
        return np.where(u == 0, 0j, val)

    def cf(self, t: float, u, method: str = "auto"):
        if t == 0:
            self.check_argument(u)
            return np.ones_like(np.asarray(u, dtype=complex))
        return np.exp(t * self.exponent(u, method))

    def cumulant(self, u, method: str = "auto"):
        return cumulant(self, u, method)

    def to_convention(self, convention: Convention) -> "LevyTriplet":
        if convention == self.convention:
            return self
        shift = self.nu.big_jump_mean()
        b = self.b + shift if convention == Convention.COMPENSATE_ALL else self.b - shift
        return replace(self, b=b, convention=convention)

    def jump_exponent(self, u):
        """Exponent of the compensated jump part alone."""
        t = self.to_convention(Convention.COMPENSATE_ALL)
        u = np.asarray(u, dtype=complex)
        return t.exponent(u) - 1j * u * t.b + 0.5 * t.c * u * u


def levy_exponent(triplet: LevyTriplet, u, method: str = "auto"):
    return triplet.exponent(u, method)


def characteristic_function(triplet: LevyTriplet, t: float, u, method: str = "auto"):
    if t < 0:
        raise ValueError("t must be >= 0")
    return triplet.cf(t, u, method)


def cumulant(triplet: LevyTriplet, u, method: str = "auto"):
    """kappa(u) = log E[e^{u L_1}] = psi(-iu) for real u in the strip."""
    u_arr = np.asarray(u, dtype=float)
    val = np.asarray(triplet.exponent(-1j * u_arr, method))
    if np.any(np.abs(val.imag) > 1e-10 * np.maximum(1.0, np.abs(val.real))):
        raise IntegrationFailure("cumulant has a non-negligible imaginary part", imag=float(np.max(np.abs(val.imag))))
    out = val.real
    return float(out) if out.ndim == 0 else out


def classify(triplet: LevyTriplet) -> PathReport:
    nu = triplet.nu
    activity = Finiteness.FINITE if nu.mass_finite() else Finiteness.INFINITE
    small_finite = nu.small_abs_moment_finite()
    variation = Finiteness.FINITE if (triplet.c == 0 and small_finite) else Finiteness.INFINITE
    subordinator = False
    if not nu.has_negative and triplet.c == 0 and small_finite:
        tu = triplet.to_convention(Convention.TRUNCATE_UNIT)
        gamma = tu.b - nu.integrate(lambda x: x, 0.0, math.nextafter(1.0, 0.0))
        subordinator = gamma >= -1e-12
    return PathReport(
        activity=activity,
        variation=variation,
        subordinator=subordinator,
        spectrally_negative=not nu.has_positive,
        spectrally_positive=not nu.has_negative,
        special_semimartingale=nu.tail_moment_finite(1.0),
    )


def moment_finite(triplet: LevyTriplet, p: float) -> bool:
    if p < 0:
        raise ValueError("p must be >= 0")
    return triplet.nu.tail_moment_finite(p)


def exp_moment_finite(triplet: LevyTriplet, p: float) -> bool:
    return triplet.exp_moment_finite(p)


def infinite_divisibility_residual(model, n: int, grid: Iterable[float]) -> float:
    """max_u |phi_1(u) - phi_{1/n}(u)^n| for anything exposing ``cf(t, u)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = np.asarray(list(grid), dtype=float)
    whole = np.asarray(model.cf(1.0, u))
    part = np.asarray(model.cf(1.0 / n, u))
    return float(np.max(np.abs(whole - part**n)))
